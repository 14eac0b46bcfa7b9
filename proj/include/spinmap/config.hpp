// config.hpp — JSON experiment configuration: parsing, validation, canonical form, hashing.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "spinmap/dynmap.hpp"
#include "spinmap/propagator.hpp"
#include "spinmap/spectral.hpp"
#include "spinmap/tcl2.hpp"

namespace spinmap::config {

// Frequencies are given in units of the tunneling splitting (delta below).
struct OhmicModel {
  double alpha = 0.2;
  double omega_c = 5.0;
};

// Parameters in the shape's native units, where the distribution starts at b and its
// peak sits at b + c/3^(1/3); the density is rescaled at build time so that the peak
// frequency coincides with twice the tunneling splitting.
struct GappedModel {
  double alpha = 0.1;
  double a = 0.677;
  double b = 0.541;
  double c = 1.280;
  std::optional<double> omega_min;
  std::optional<double> omega_max;
};

using Model = std::variant<OhmicModel, GappedModel>;

struct StateAngles {
  double theta = 0.0;
  double phi = 0.0;
};

struct BathSection {
  int n_modes = 4;
  std::optional<double> omega_lo;  // defaults depend on the model shape
  std::optional<double> omega_hi;
};

struct TimeSection {
  double dt = 1e-3;
  long steps = 10000;
  long snapshot_stride = 50;
};

struct AnalysisSection {
  dynmap::AsymptoticOptions asymptotics;
  double cond_limit = 1e6;
};

struct BoundSection {
  int n_draws = 100;
  double slack = 1e-12;
};

struct Tcl2Section {
  std::optional<tcl2::Rates> rates;  // when absent, rates derive from the model density
  double t_max = 20.0;
  long n_samples = 400;
  StateAngles initial;
};

struct ExperimentConfig {
  double delta = 1.0;
  Model model;
  BathSection bath;
  int fock_cutoff = 6;
  double memory_budget_mb = 4096.0;
  TimeSection time;
  propagator::KrylovOptions krylov;
  std::vector<StateAngles> extra_states;
  AnalysisSection analysis;
  BoundSection bound;
  Tcl2Section tcl2;
  std::uint64_t seed = 12345;
};

// Builds the spectral density in output units; gapped shapes are rescaled so that
// their peak frequency equals 2 * delta.
spectral::SpectralDensity build_density(const Model& model, double delta);

// Discretization window for the configured bath (model defaults when unset).
std::pair<double, double> bath_window(const ExperimentConfig& cfg);

ExperimentConfig default_config();

// Throws ConfigError with a JSON-path message on missing keys, wrong types,
// out-of-range values, or unrecognized keys.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical JSON (all defaults materialized, keys sorted); two configs describing the
// same experiment serialize identically.
std::string canonical_json(const ExperimentConfig& cfg);

// FNV-1a 64-bit hash of the canonical JSON, as a 16-digit hex string.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace spinmap::config

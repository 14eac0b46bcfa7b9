// config.cpp — JSON experiment configuration: parsing, validation, canonical form, hashing.
#include "spinmap/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "spinmap/errors.hpp"

namespace spinmap::config {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

const char* type_name(const json& j) {
  switch (j.type()) {
    case json::value_t::object: return "object";
    case json::value_t::array: return "array";
    case json::value_t::string: return "string";
    case json::value_t::boolean: return "boolean";
    case json::value_t::null: return "null";
    default: return j.is_number() ? "number" : "value";
  }
}

// Strict object view: every key must be consumed, numbers are range-checked, and all
// diagnostics carry the JSON path of the offending entry.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, std::string("expected an object, got ") + type_name(j_));
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  double number(const std::string& key, double fallback) {
    if (!take(key)) return fallback;
    return as_number(j_.at(key), path_of(key));
  }

  double positive(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v > 0.0)) fail(path_of(key), "must be > 0");
    return v;
  }

  double non_negative(const std::string& key, double fallback) {
    const double v = number(key, fallback);
    if (!(v >= 0.0)) fail(path_of(key), "must be >= 0");
    return v;
  }

  std::optional<double> optional_number(const std::string& key) {
    if (!take(key) || j_.at(key).is_null()) return std::nullopt;
    return as_number(j_.at(key), path_of(key));
  }

  long integer(const std::string& key, long fallback, long lo, long hi) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer())
      fail(path_of(key), std::string("expected an integer, got ") + type_name(v));
    const long x = v.get<long>();
    if (x < lo || x > hi)
      fail(path_of(key), "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    if (!take(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(path_of(key), std::string("expected a string, got ") + type_name(v));
    return v.get<std::string>();
  }

  std::string require_text(const std::string& key) {
    if (!has(key)) fail(path_, "missing required key '" + key + "'");
    return text(key, "");
  }

  const json* object(const std::string& key) {
    if (!take(key)) return nullptr;
    return &j_.at(key);
  }

  std::string path_of(const std::string& key) const { return path_ + "." + key; }

  // Call after all known keys were consumed; anything left is a typo or unsupported knob.
  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) fail(path_of(item.key()), "unrecognized key");
  }

 private:
  bool take(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, std::string("expected a number, got ") + type_name(v));
    return v.get<double>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Model parse_model(const json& j, const std::string& path) {
  Section s(j, path);
  const std::string type = s.require_text("type");
  if (type == "ohmic") {
    OhmicModel m;
    m.alpha = s.non_negative("alpha", m.alpha);
    m.omega_c = s.positive("omega_c", m.omega_c);
    s.finish();
    return m;
  }
  if (type == "gapped") {
    GappedModel m;
    m.alpha = s.non_negative("alpha", m.alpha);
    m.a = s.positive("a", m.a);
    m.b = s.positive("b", m.b);
    m.c = s.positive("c", m.c);
    m.omega_min = s.optional_number("omega_min");
    m.omega_max = s.optional_number("omega_max");
    if (m.omega_min && !(*m.omega_min >= 0.0)) fail(path + ".omega_min", "must be >= 0");
    if (m.omega_max && m.omega_min && !(*m.omega_max > *m.omega_min))
      fail(path + ".omega_max", "must exceed omega_min");
    s.finish();
    return m;
  }
  fail(path + ".type", "unknown model type '" + type + "' (expected ohmic or gapped)");
}

std::vector<StateAngles> parse_states(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, std::string("expected an array, got ") + type_name(j));
  std::vector<StateAngles> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    Section s(j.at(i), path + "[" + std::to_string(i) + "]");
    StateAngles angles;
    angles.theta = s.number("theta", 0.0);
    angles.phi = s.number("phi", 0.0);
    s.finish();
    out.push_back(angles);
  }
  return out;
}

json model_to_json(const Model& model) {
  json j;
  if (const auto* ohmic = std::get_if<OhmicModel>(&model)) {
    j["type"] = "ohmic";
    j["alpha"] = ohmic->alpha;
    j["omega_c"] = ohmic->omega_c;
  } else {
    const auto& g = std::get<GappedModel>(model);
    j["type"] = "gapped";
    j["alpha"] = g.alpha;
    j["a"] = g.a;
    j["b"] = g.b;
    j["c"] = g.c;
    j["omega_min"] = g.omega_min ? json(*g.omega_min) : json(nullptr);
    j["omega_max"] = g.omega_max ? json(*g.omega_max) : json(nullptr);
  }
  return j;
}

}  // namespace

spectral::SpectralDensity build_density(const Model& model, double delta) {
  if (const auto* ohmic = std::get_if<OhmicModel>(&model))
    return spectral::OhmicDensity{ohmic->alpha, ohmic->omega_c * delta};
  const auto& g = std::get<GappedModel>(model);
  spectral::GappedDensity raw{g.alpha, g.a, g.b, g.c, g.omega_min.value_or(0.0),
                              g.omega_max.value_or(0.0)};
  return raw.rescaled(raw.peak_frequency() / (2.0 * delta));
}

std::pair<double, double> bath_window(const ExperimentConfig& cfg) {
  const spectral::SpectralDensity density = build_density(cfg.model, cfg.delta);
  auto [lo, hi] = spectral::default_range(density);
  if (cfg.bath.omega_hi) hi = *cfg.bath.omega_hi;
  if (cfg.bath.omega_lo)
    lo = *cfg.bath.omega_lo;
  else if (std::holds_alternative<spectral::OhmicDensity>(density))
    lo = hi / cfg.bath.n_modes;
  if (!(hi > lo)) throw ConfigError("config: bath: omega_hi must exceed omega_lo");
  return {lo, hi};
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }

  ExperimentConfig cfg;
  Section root(j, "$");
  cfg.delta = root.positive("delta", cfg.delta);
  if (const json* m = root.object("model")) cfg.model = parse_model(*m, "$.model");
  if (const json* b = root.object("bath")) {
    Section s(*b, "$.bath");
    cfg.bath.n_modes = static_cast<int>(s.integer("n_modes", cfg.bath.n_modes, 1, 4096));
    cfg.bath.omega_lo = s.optional_number("omega_lo");
    cfg.bath.omega_hi = s.optional_number("omega_hi");
    if (cfg.bath.omega_lo && !(*cfg.bath.omega_lo >= 0.0)) fail("$.bath.omega_lo", "must be >= 0");
    s.finish();
  }
  cfg.fock_cutoff = static_cast<int>(root.integer("fock_cutoff", cfg.fock_cutoff, 2, 1024));
  cfg.memory_budget_mb = root.positive("memory_budget_mb", cfg.memory_budget_mb);
  if (const json* t = root.object("time")) {
    Section s(*t, "$.time");
    cfg.time.dt = s.positive("dt", cfg.time.dt);
    cfg.time.steps = s.integer("steps", cfg.time.steps, 0, 100000000L);
    cfg.time.snapshot_stride = s.integer("snapshot_stride", cfg.time.snapshot_stride, 1,
                                         100000000L);
    s.finish();
  }
  if (const json* k = root.object("krylov")) {
    Section s(*k, "$.krylov");
    cfg.krylov.max_dim = static_cast<int>(s.integer("max_dim", cfg.krylov.max_dim, 2, 512));
    cfg.krylov.tol = s.positive("tol", cfg.krylov.tol);
    cfg.krylov.max_splits = static_cast<int>(s.integer("max_splits", cfg.krylov.max_splits, 0,
                                                       48));
    s.finish();
  }
  if (const json* e = root.object("extra_states"))
    cfg.extra_states = parse_states(*e, "$.extra_states");
  if (const json* a = root.object("analysis")) {
    Section s(*a, "$.analysis");
    cfg.analysis.asymptotics.window_fraction =
        s.positive("window_fraction", cfg.analysis.asymptotics.window_fraction);
    if (cfg.analysis.asymptotics.window_fraction > 1.0)
      fail("$.analysis.window_fraction", "must be <= 1");
    cfg.analysis.asymptotics.tol_stationary =
        s.positive("tol_stationary", cfg.analysis.asymptotics.tol_stationary);
    cfg.analysis.asymptotics.tol_zero = s.positive("tol_zero", cfg.analysis.asymptotics.tol_zero);
    cfg.analysis.cond_limit = s.positive("cond_limit", cfg.analysis.cond_limit);
    s.finish();
  }
  if (const json* b = root.object("bound")) {
    Section s(*b, "$.bound");
    cfg.bound.n_draws = static_cast<int>(s.integer("n_draws", cfg.bound.n_draws, 0, 1000000));
    cfg.bound.slack = s.positive("slack", cfg.bound.slack);
    s.finish();
  }
  if (const json* t = root.object("tcl2")) {
    Section s(*t, "$.tcl2");
    if (const json* r = s.object("rates")) {
      if (!r->is_null()) {
        Section rs(*r, "$.tcl2.rates");
        tcl2::Rates rates;
        rates.gamma_xx = rs.non_negative("gamma_xx", 0.0);
        rates.gamma_x = rs.number("gamma_x", 0.0);
        rates.gamma_yy = rs.non_negative("gamma_yy", 0.0);
        rates.gamma_yz = rs.number("gamma_yz", 0.0);
        rs.finish();
        cfg.tcl2.rates = rates;
      }
    }
    cfg.tcl2.t_max = s.positive("t_max", cfg.tcl2.t_max);
    cfg.tcl2.n_samples = s.integer("n_samples", cfg.tcl2.n_samples, 2, 100000000L);
    if (const json* i = s.object("initial")) {
      Section is(*i, "$.tcl2.initial");
      cfg.tcl2.initial.theta = is.number("theta", 0.0);
      cfg.tcl2.initial.phi = is.number("phi", 0.0);
      is.finish();
    }
    s.finish();
  }
  cfg.seed = static_cast<std::uint64_t>(
      root.integer("seed", static_cast<long>(cfg.seed), 0, 9007199254740992L));
  root.finish();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string canonical_json(const ExperimentConfig& cfg) {
  json j;
  j["delta"] = cfg.delta;
  j["model"] = model_to_json(cfg.model);
  j["bath"] = {{"n_modes", cfg.bath.n_modes},
               {"omega_lo", cfg.bath.omega_lo ? json(*cfg.bath.omega_lo) : json(nullptr)},
               {"omega_hi", cfg.bath.omega_hi ? json(*cfg.bath.omega_hi) : json(nullptr)}};
  j["fock_cutoff"] = cfg.fock_cutoff;
  j["memory_budget_mb"] = cfg.memory_budget_mb;
  j["time"] = {{"dt", cfg.time.dt},
               {"steps", cfg.time.steps},
               {"snapshot_stride", cfg.time.snapshot_stride}};
  j["krylov"] = {{"max_dim", cfg.krylov.max_dim},
                 {"tol", cfg.krylov.tol},
                 {"max_splits", cfg.krylov.max_splits}};
  j["extra_states"] = json::array();
  for (const StateAngles& s : cfg.extra_states)
    j["extra_states"].push_back({{"theta", s.theta}, {"phi", s.phi}});
  j["analysis"] = {{"window_fraction", cfg.analysis.asymptotics.window_fraction},
                   {"tol_stationary", cfg.analysis.asymptotics.tol_stationary},
                   {"tol_zero", cfg.analysis.asymptotics.tol_zero},
                   {"cond_limit", cfg.analysis.cond_limit}};
  j["bound"] = {{"n_draws", cfg.bound.n_draws}, {"slack", cfg.bound.slack}};
  j["tcl2"] = {{"rates", cfg.tcl2.rates
                             ? json({{"gamma_xx", cfg.tcl2.rates->gamma_xx},
                                     {"gamma_x", cfg.tcl2.rates->gamma_x},
                                     {"gamma_yy", cfg.tcl2.rates->gamma_yy},
                                     {"gamma_yz", cfg.tcl2.rates->gamma_yz}})
                             : json(nullptr)},
               {"t_max", cfg.tcl2.t_max},
               {"n_samples", cfg.tcl2.n_samples},
               {"initial", {{"theta", cfg.tcl2.initial.theta}, {"phi", cfg.tcl2.initial.phi}}}};
  j["seed"] = cfg.seed;
  return j.dump(2);  // nlohmann objects iterate in key order, so the dump is canonical
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = canonical_json(cfg);
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spinmap::config

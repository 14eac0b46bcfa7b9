// propagator.hpp — exact unitary dynamics of one spin coupled to a truncated oscillator bath:
// sparse Hamiltonian assembly, Krylov (Lanczos) exponential stepping, reduced states,
// convergence monitors, and batch trajectory runs.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spinmap/spectral.hpp"

namespace spinmap::propagator {

using Complex = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using WaveFunction = Eigen::VectorXcd;

// Joint spin + truncated-Fock state space. Index layout: i = s * B + f where s is the spin
// (0 = up, 1 = down), B = prod(cutoff) and f runs row-major over mode occupations
// (mode 0 slowest). Cutoff d_n means occupations 0 .. d_n - 1.
struct HilbertSpaceSpec {
  spectral::DiscretizedBath bath;
  std::vector<int> cutoff;  // one entry per mode, each >= 2

  static HilbertSpaceSpec uniform(spectral::DiscretizedBath bath, int cutoff);

  std::size_t bath_dim() const;
  std::size_t total_dim() const;  // 2 * bath_dim()
  // Throws ResourceError if the propagation working set (state + Krylov basis) exceeds
  // the byte budget, std::invalid_argument on malformed cutoffs.
  void validate(std::size_t budget_bytes, int krylov_dim = 32) const;
};

// H = Delta sx + sum_n w_n (a_n^dag a_n + 1/2) + sz sum_n c_n (a_n + a_n^dag)/sqrt(2 w_n).
struct SparseHamiltonian {
  SparseMatrix h;
  double delta{0.0};
  HilbertSpaceSpec space;
};

SparseHamiltonian build_hamiltonian(const HilbertSpaceSpec& space, double delta);

// |spin(theta, phi)> (x) |vacuum>; requires normalized pure spin input by construction.
WaveFunction initial_joint_state(const HilbertSpaceSpec& space, double theta, double phi);

// Reduced 2x2 spin state by tracing out all modes.
Eigen::Matrix2cd reduced_density(const HilbertSpaceSpec& space, const WaveFunction& psi);

// Total population of basis states with any mode at its highest retained level; an
// upper proxy for truncation error. Zero coupling or vacuum gives exactly 0.
double cutoff_population(const HilbertSpaceSpec& space, const WaveFunction& psi);

double energy(const SparseHamiltonian& h, const WaveFunction& psi);

struct KrylovOptions {
  int max_dim{30};        // hard cap on the subspace size per (sub)step
  double tol{1e-12};      // per-step local error estimate, relative to ||psi||
  int max_splits{16};     // recursion depth for step halving before giving up
};

struct StepStats {
  int dim_used{0};        // largest subspace used in any substep
  int substeps{1};        // 1 = no halving needed
  double err_estimate{0}; // summed local error estimates (relative)
};

// One Lanczos exponential e^{-i H dt} applicator with reusable workspace. Not thread-safe;
// use one instance per thread. Falls back to halved substeps when the subspace cap cannot
// reach tol; throws std::runtime_error with the residual if max_splits is exhausted.
class Propagator {
 public:
  Propagator(const SparseHamiltonian& h, KrylovOptions opt = {});

  StepStats step(WaveFunction& psi, double dt);
  const KrylovOptions& options() const { return opt_; }

 private:
  double lanczos_apply(WaveFunction& psi, double dt);  // returns error estimate or -1
  StepStats step_recursive(WaveFunction& psi, double dt, int depth);

  const SparseHamiltonian& h_;
  KrylovOptions opt_;
  Eigen::MatrixXcd v_;      // Krylov basis
  Eigen::VectorXd alpha_, beta_;
  WaveFunction w_;
  int dim_used_last_{0};
};

// Fixed-step propagation collecting every stride-th state (t = 0 included).
std::vector<WaveFunction> propagate_snapshots(const SparseHamiltonian& h, WaveFunction psi,
                                              double dt, long steps, long stride,
                                              KrylovOptions opt = {});

// Reduced-state time series for one initial spin direction, with health diagnostics
// accumulated over the sampled times.
struct Trajectory {
  std::string label;
  double theta{0.0}, phi{0.0};
  std::vector<double> t;
  std::vector<Eigen::Matrix2cd> rho;
  double max_norm_drift{0.0};        // | ||psi|| - 1 |
  double max_energy_drift{0.0};      // relative to <H>(0)
  double max_cutoff_population{0.0};
};

struct TimeGrid {
  double dt{1e-3};
  long steps{1000};
  long snapshot_stride{10};
};

Trajectory run_state_trajectory(const SparseHamiltonian& h, double theta, double phi,
                                const TimeGrid& grid, const std::string& label,
                                KrylovOptions opt = {});

// The four reconstruction inputs: up, down, +x, +y (in that order), optionally followed by
// extra (theta, phi) states. Runs trajectories concurrently on up to `workers` threads.
std::vector<Trajectory> run_basis_trajectories(const SparseHamiltonian& h, const TimeGrid& grid,
                                               const std::vector<std::pair<double, double>>&
                                                   extra_states = {},
                                               int workers = 1, KrylovOptions opt = {});

// Versioned little-endian binary amplitude dump (resume support for long runs):
// magic "SMCK", u32 version, u64 config_hash, u64 step, f64 t, u64 dim, dim * (f64 re, f64 im).
struct Checkpoint {
  std::uint64_t config_hash{0};
  std::uint64_t step{0};
  double t{0.0};
  WaveFunction psi;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace spinmap::propagator

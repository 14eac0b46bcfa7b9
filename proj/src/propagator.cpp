#include "spinmap/propagator.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "spinmap/errors.hpp"

namespace spinmap::propagator {

namespace {
constexpr Complex kI{0.0, 1.0};
}

HilbertSpaceSpec HilbertSpaceSpec::uniform(spectral::DiscretizedBath bath, int cutoff) {
  HilbertSpaceSpec s;
  s.cutoff.assign(static_cast<std::size_t>(bath.n_modes()), cutoff);
  s.bath = std::move(bath);
  return s;
}

std::size_t HilbertSpaceSpec::bath_dim() const {
  std::size_t d = 1;
  for (int c : cutoff) {
    if (c < 2) throw std::invalid_argument("HilbertSpaceSpec: cutoffs must be >= 2");
    if (d > (std::size_t{1} << 62) / static_cast<std::size_t>(c))
      throw ResourceError("HilbertSpaceSpec: state space dimension overflows");
    d *= static_cast<std::size_t>(c);
  }
  return d;
}

std::size_t HilbertSpaceSpec::total_dim() const { return 2 * bath_dim(); }

void HilbertSpaceSpec::validate(std::size_t budget_bytes, int krylov_dim) const {
  if (cutoff.size() != static_cast<std::size_t>(bath.n_modes()))
    throw std::invalid_argument("HilbertSpaceSpec: one cutoff per bath mode required");
  const std::size_t d = total_dim();
  const std::size_t per_vector = d * sizeof(Complex);
  const std::size_t vectors = static_cast<std::size_t>(krylov_dim) + 4;
  if (per_vector > budget_bytes / vectors)
    throw ResourceError("HilbertSpaceSpec: dimension " + std::to_string(d) +
                        " exceeds the memory budget for the propagation working set");
}

SparseHamiltonian build_hamiltonian(const HilbertSpaceSpec& space, double delta) {
  const int n_modes = space.bath.n_modes();
  if (space.cutoff.size() != static_cast<std::size_t>(n_modes))
    throw std::invalid_argument("build_hamiltonian: one cutoff per bath mode required");
  const std::size_t b_dim = space.bath_dim();
  const std::size_t dim = 2 * b_dim;

  // Row-major strides over mode occupations; mode 0 slowest.
  std::vector<std::size_t> stride(static_cast<std::size_t>(n_modes), 1);
  for (int k = n_modes - 2; k >= 0; --k)
    stride[k] = stride[k + 1] * static_cast<std::size_t>(space.cutoff[k + 1]);

  std::vector<double> g(static_cast<std::size_t>(n_modes));  // c_n / sqrt(2 w_n)
  for (int k = 0; k < n_modes; ++k) {
    if (space.bath.omega[k] <= 0.0)
      throw std::invalid_argument("build_hamiltonian: mode frequencies must be positive");
    g[k] = space.bath.coupling[k] / std::sqrt(2.0 * space.bath.omega[k]);
  }

  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(dim * (2 + 2 * static_cast<std::size_t>(n_modes)));
  std::vector<int> occ(static_cast<std::size_t>(n_modes), 0);
  for (std::size_t f = 0; f < b_dim; ++f) {
    // Decode occupations once per Fock index.
    std::size_t rem = f;
    double e_bath = 0.0;
    for (int k = 0; k < n_modes; ++k) {
      occ[k] = static_cast<int>(rem / stride[k]);
      rem %= stride[k];
      e_bath += space.bath.omega[k] * (occ[k] + 0.5);
    }
    for (int s = 0; s < 2; ++s) {
      const std::size_t i = static_cast<std::size_t>(s) * b_dim + f;
      trip.emplace_back(i, i, Complex{e_bath, 0.0});
      const double sign = (s == 0) ? 1.0 : -1.0;  // <s| sz |s>
      for (int k = 0; k < n_modes; ++k) {
        if (g[k] == 0.0 || occ[k] + 1 >= space.cutoff[k]) continue;
        const std::size_t j = i + stride[k];  // raise mode k
        const double val = sign * g[k] * std::sqrt(static_cast<double>(occ[k] + 1));
        trip.emplace_back(j, i, Complex{val, 0.0});
        trip.emplace_back(i, j, Complex{val, 0.0});
      }
    }
    // Delta sx couples the spin sectors.
    if (delta != 0.0) {
      trip.emplace_back(f, b_dim + f, Complex{delta, 0.0});
      trip.emplace_back(b_dim + f, f, Complex{delta, 0.0});
    }
  }

  SparseHamiltonian out;
  out.delta = delta;
  out.space = space;
  out.h.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  out.h.setFromTriplets(trip.begin(), trip.end());
  out.h.makeCompressed();
  return out;
}

WaveFunction initial_joint_state(const HilbertSpaceSpec& space, double theta, double phi) {
  const std::size_t b_dim = space.bath_dim();
  WaveFunction psi = WaveFunction::Zero(static_cast<Eigen::Index>(2 * b_dim));
  psi(0) = std::cos(theta / 2.0);
  psi(static_cast<Eigen::Index>(b_dim)) = std::exp(kI * phi) * std::sin(theta / 2.0);
  return psi;
}

Eigen::Matrix2cd reduced_density(const HilbertSpaceSpec& space, const WaveFunction& psi) {
  const std::size_t b_dim = space.bath_dim();
  if (psi.size() != static_cast<Eigen::Index>(2 * b_dim))
    throw std::invalid_argument("reduced_density: state size does not match the space");
  const auto up = psi.head(static_cast<Eigen::Index>(b_dim));
  const auto dn = psi.tail(static_cast<Eigen::Index>(b_dim));
  Eigen::Matrix2cd rho;
  rho(0, 0) = up.squaredNorm();
  rho(1, 1) = dn.squaredNorm();
  rho(0, 1) = dn.dot(up);  // sum_f up_f conj(dn_f)
  rho(1, 0) = std::conj(rho(0, 1));
  return rho;
}

double cutoff_population(const HilbertSpaceSpec& space, const WaveFunction& psi) {
  const int n_modes = space.bath.n_modes();
  const std::size_t b_dim = space.bath_dim();
  if (psi.size() != static_cast<Eigen::Index>(2 * b_dim))
    throw std::invalid_argument("cutoff_population: state size does not match the space");
  if (n_modes == 0) return 0.0;
  std::vector<std::size_t> stride(static_cast<std::size_t>(n_modes), 1);
  for (int k = n_modes - 2; k >= 0; --k)
    stride[k] = stride[k + 1] * static_cast<std::size_t>(space.cutoff[k + 1]);
  double pop = 0.0;
  for (std::size_t f = 0; f < b_dim; ++f) {
    std::size_t rem = f;
    bool top = false;
    for (int k = 0; k < n_modes && !top; ++k) {
      top = static_cast<int>(rem / stride[k]) == space.cutoff[k] - 1;
      rem %= stride[k];
    }
    if (top)
      pop += std::norm(psi(static_cast<Eigen::Index>(f))) +
             std::norm(psi(static_cast<Eigen::Index>(b_dim + f)));
  }
  return pop;
}

double energy(const SparseHamiltonian& h, const WaveFunction& psi) {
  return psi.dot(h.h * psi).real();
}

Propagator::Propagator(const SparseHamiltonian& h, KrylovOptions opt) : h_(h), opt_(opt) {
  if (opt_.max_dim < 2) throw std::invalid_argument("Propagator: krylov dimension must be >= 2");
  if (opt_.tol <= 0.0) throw std::invalid_argument("Propagator: tolerance must be > 0");
  const Eigen::Index dim = h_.h.rows();
  v_.resize(dim, opt_.max_dim);
  alpha_.resize(opt_.max_dim);
  beta_.resize(opt_.max_dim);
  w_.resize(dim);
}

namespace {

// u = exp(-i dt T) e1 for the symmetric tridiagonal T given by (alpha, beta).
Eigen::VectorXcd tridiag_exp_e1(const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta,
                                int m, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(alpha.head(m), beta.head(m - 1));
  const auto& q = es.eigenvectors();
  const auto& lam = es.eigenvalues();
  Eigen::VectorXcd phase(m);
  for (int k = 0; k < m; ++k) phase(k) = std::exp(-kI * dt * lam(k)) * q(0, k);
  return q * phase;
}

}  // namespace

double Propagator::lanczos_apply(WaveFunction& psi, double dt) {
  const double beta0 = psi.norm();
  if (beta0 == 0.0) throw std::invalid_argument("Propagator: zero state");
  v_.col(0) = psi / beta0;

  Eigen::VectorXcd u;
  int m = 0;
  double err = -1.0;
  for (int j = 0; j < opt_.max_dim; ++j) {
    w_.noalias() = h_.h * v_.col(j);
    alpha_(j) = v_.col(j).dot(w_).real();
    w_ -= alpha_(j) * v_.col(j);
    if (j > 0) w_ -= beta_(j - 1) * v_.col(j - 1);
    // Two passes of classical Gram-Schmidt keep the basis orthonormal to rounding.
    for (int pass = 0; pass < 2; ++pass)
      for (int k = 0; k <= j; ++k) w_ -= v_.col(k).dot(w_) * v_.col(k);
    beta_(j) = w_.norm();
    m = j + 1;
    u = tridiag_exp_e1(alpha_, beta_, m, dt);
    err = beta_(j) * std::abs(u(m - 1));  // Saad residual estimate, relative to ||psi||
    if (beta_(j) < 1e-14 * (1.0 + std::abs(alpha_(j)))) {  // invariant subspace: exact
      err = 0.0;
      break;
    }
    if (err < opt_.tol) break;
    if (j + 1 < opt_.max_dim) v_.col(j + 1) = w_ / beta_(j);
  }
  dim_used_last_ = m;
  if (err > opt_.tol) return -1.0;  // subspace cap reached without convergence
  psi.noalias() = v_.leftCols(m) * (beta0 * u);
  return err;
}

StepStats Propagator::step_recursive(WaveFunction& psi, double dt, int depth) {
  // lanczos_apply leaves psi untouched when it cannot reach tol, so no state restore
  // is needed on the halving path.
  const double err = lanczos_apply(psi, dt);
  if (err >= 0.0) return {dim_used_last_, 1, err};
  if (depth >= opt_.max_splits)
    throw std::runtime_error(
        "Propagator: Krylov step did not reach tol " + std::to_string(opt_.tol) +
        " after " + std::to_string(depth) + " halvings (dim cap " +
        std::to_string(opt_.max_dim) + "); increase krylov dimension or reduce dt");
  StepStats a = step_recursive(psi, 0.5 * dt, depth + 1);
  StepStats b = step_recursive(psi, 0.5 * dt, depth + 1);
  return {std::max(a.dim_used, b.dim_used), a.substeps + b.substeps,
          a.err_estimate + b.err_estimate};
}

StepStats Propagator::step(WaveFunction& psi, double dt) {
  if (psi.size() != h_.h.rows())
    throw std::invalid_argument("Propagator: state size does not match the Hamiltonian");
  if (dt == 0.0) return {0, 0, 0.0};
  return step_recursive(psi, dt, 0);
}

std::vector<WaveFunction> propagate_snapshots(const SparseHamiltonian& h, WaveFunction psi,
                                              double dt, long steps, long stride,
                                              KrylovOptions opt) {
  if (steps < 0 || stride < 1)
    throw std::invalid_argument("propagate_snapshots: need steps >= 0 and stride >= 1");
  Propagator prop(h, opt);
  std::vector<WaveFunction> out;
  out.reserve(static_cast<std::size_t>(steps / stride) + 1);
  out.push_back(psi);
  for (long k = 1; k <= steps; ++k) {
    prop.step(psi, dt);
    if (k % stride == 0) out.push_back(psi);
  }
  return out;
}

Trajectory run_state_trajectory(const SparseHamiltonian& h, double theta, double phi,
                                const TimeGrid& grid, const std::string& label,
                                KrylovOptions opt) {
  if (grid.steps < 0 || grid.snapshot_stride < 1 || grid.dt <= 0.0)
    throw std::invalid_argument("run_state_trajectory: malformed time grid");
  WaveFunction psi = initial_joint_state(h.space, theta, phi);
  Propagator prop(h, opt);
  Trajectory traj;
  traj.label = label;
  traj.theta = theta;
  traj.phi = phi;
  const double e0 = energy(h, psi);
  const double e_scale = std::max(std::abs(e0), 1e-300);

  auto record = [&](long k) {
    traj.t.push_back(grid.dt * static_cast<double>(k));
    traj.rho.push_back(reduced_density(h.space, psi));
    traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(psi.norm() - 1.0));
    traj.max_energy_drift =
        std::max(traj.max_energy_drift, std::abs(energy(h, psi) - e0) / e_scale);
    traj.max_cutoff_population =
        std::max(traj.max_cutoff_population, cutoff_population(h.space, psi));
  };
  record(0);
  for (long k = 1; k <= grid.steps; ++k) {
    prop.step(psi, grid.dt);
    if (k % grid.snapshot_stride == 0) record(k);
  }
  return traj;
}

std::vector<Trajectory> run_basis_trajectories(const SparseHamiltonian& h, const TimeGrid& grid,
                                               const std::vector<std::pair<double, double>>&
                                                   extra_states,
                                               int workers, KrylovOptions opt) {
  constexpr double kPi = std::numbers::pi;
  struct Job {
    std::string label;
    double theta, phi;
  };
  std::vector<Job> jobs = {{"up", 0.0, 0.0},
                           {"down", kPi, 0.0},
                           {"plus_x", 0.5 * kPi, 0.0},
                           {"plus_y", 0.5 * kPi, 0.5 * kPi}};
  for (std::size_t i = 0; i < extra_states.size(); ++i)
    jobs.push_back({"extra_" + std::to_string(i), extra_states[i].first, extra_states[i].second});

  std::vector<Trajectory> out(jobs.size());
  const int n_threads = std::max(1, std::min<int>(workers, static_cast<int>(jobs.size())));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1))
          out[i] = run_state_trajectory(h, jobs[i].theta, jobs[i].phi, grid, jobs[i].label, opt);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const char magic[4] = {'S', 'M', 'C', 'K'};
  const std::uint32_t version = 1;
  const std::uint64_t dim = static_cast<std::uint64_t>(c.psi.size());
  bool ok = std::fwrite(magic, 1, 4, f) == 4 &&
            std::fwrite(&version, sizeof version, 1, f) == 1 &&
            std::fwrite(&c.config_hash, sizeof c.config_hash, 1, f) == 1 &&
            std::fwrite(&c.step, sizeof c.step, 1, f) == 1 &&
            std::fwrite(&c.t, sizeof c.t, 1, f) == 1 &&
            std::fwrite(&dim, sizeof dim, 1, f) == 1;
  ok = ok && std::fwrite(c.psi.data(), sizeof(Complex), dim, f) == dim;
  std::fclose(f);
  if (!ok) throw std::runtime_error("save_checkpoint: short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[4];
  std::uint32_t version = 0;
  std::uint64_t dim = 0;
  Checkpoint c;
  bool ok = std::fread(magic, 1, 4, f) == 4 && std::memcmp(magic, "SMCK", 4) == 0 &&
            std::fread(&version, sizeof version, 1, f) == 1 && version == 1 &&
            std::fread(&c.config_hash, sizeof c.config_hash, 1, f) == 1 &&
            std::fread(&c.step, sizeof c.step, 1, f) == 1 &&
            std::fread(&c.t, sizeof c.t, 1, f) == 1 &&
            std::fread(&dim, sizeof dim, 1, f) == 1;
  if (ok) {
    c.psi.resize(static_cast<Eigen::Index>(dim));
    ok = std::fread(c.psi.data(), sizeof(Complex), dim, f) == dim;
  }
  std::fclose(f);
  if (!ok) throw std::runtime_error("load_checkpoint: malformed checkpoint " + path);
  return c;
}

}  // namespace spinmap::propagator

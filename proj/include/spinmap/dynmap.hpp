// dynmap.hpp — reconstruction of the reduced dynamical map from basis trajectories, its
// affine Bloch-space form (M(t), b(t)), singular-value series, observable-difference
// bounds, and long-time classification.
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "spinmap/bloch.hpp"
#include "spinmap/propagator.hpp"

namespace spinmap::dynmap {

// Time series of linear maps Phi_t on density matrices, stored as N^2 x N^2 matrices
// acting on row-major vectorization: vec(rho)_{i*N+j} = rho_ij, so
// Phi_{ij,kl} = phi[s](i*N + j, k*N + l).
struct MapTensor {
  std::vector<double> t;
  std::vector<Eigen::MatrixXcd> phi;
  int dim{2};
};

Eigen::VectorXcd vec_rho(const Eigen::MatrixXcd& rho);
Eigen::MatrixXcd unvec_rho(const Eigen::VectorXcd& v, int n);

// Image of an arbitrary (not necessarily positive) matrix under one map sample.
Eigen::MatrixXcd apply_map(const Eigen::MatrixXcd& phi, const Eigen::MatrixXcd& rho);

// max_kl | sum_i Phi_{ii,kl} - delta_kl | — exact trace preservation gives 0.
double trace_preservation_defect(const Eigen::MatrixXcd& phi, int n);
// max | Phi_{ij,kl} - conj(Phi_{ji,lk}) | — Hermiticity preservation.
double hermiticity_defect(const Eigen::MatrixXcd& phi, int n);

// Solve Phi(t) from the four spin basis trajectories (up, down, +x, +y), which must share
// one time grid starting at t = 0. Throws AnalysisError if fewer than four trajectories,
// mismatched grids, or if the vectorized initial-state matrix has 2-norm condition number
// above cond_limit. The linear system is solved exactly; the residual on the four inputs
// stays at rounding level.
MapTensor reconstruct_map(const std::vector<propagator::Trajectory>& basis,
                          double cond_limit = 1e6);

// Affine image in generator coordinates: a(t) = M(t) a(0) + b(t) with
// M_mn = (1/2) tr(T_m Phi[T_n]) and b_m = tr(T_m Phi[1/N]).
struct AffineBlochMap {
  std::vector<double> t;
  std::vector<Eigen::MatrixXd> m;  // (N^2-1) x (N^2-1)
  std::vector<Eigen::VectorXd> b;  // N^2-1
  int dim{2};
};

// Throws AnalysisError if any sample violates trace preservation beyond tp_tol (a
// trace-preserving Hermiticity-preserving map has exactly real M and b).
AffineBlochMap tensor_to_affine(const MapTensor& maps, double tp_tol = 1e-8);

// Per-sample SVD M = V diag(s) W^T with s sorted descending; singular-vector signs are
// matched to the previous sample (columns flipped in V and W together when the overlap
// with the previous V column is negative) so the factor series is continuous.
struct SvdSeries {
  std::vector<double> t;
  std::vector<Eigen::VectorXd> s;
  std::vector<Eigen::MatrixXd> v, w;
  std::vector<Eigen::VectorXd> b;  // carried along for reporting and classification
  int dim{2};

  double s_max(std::size_t k) const { return s.at(k)(0); }
};

SvdSeries svd_series(const AffineBlochMap& affine);

// |tr{O (rho1(t) - rho2(t))}| on the trajectories' common grid.
std::vector<double> delta_observable(const propagator::Trajectory& t1,
                                     const propagator::Trajectory& t2,
                                     const bloch::Observable& o);

// Bound check for a state pair with initial Bloch vectors a1, a2:
//   general:  (N^{3/2}/sqrt(2)) |o_max| S_max(t) ||a1 - a2||_2
//   sharp:    (1/2) ||tr(O T_n)||_2 S_max(t) ||a1 - a2||_2   (Cauchy-Schwarz in generator
//             coordinates; for O = sigma_z this is 2 S_max(t) (||a1 - a2||/2))
// Throws AnalysisError when delta exceeds the general bound by more than slack anywhere,
// reporting the worst time.
struct BoundReport {
  std::vector<double> t;
  std::vector<double> delta;
  std::vector<double> bound_general;
  std::vector<double> bound_sharp;
  double worst_margin{0.0};  // min over t of (bound_general - delta)
};

BoundReport bound_check(const SvdSeries& svd, const Eigen::VectorXd& a1,
                        const Eigen::VectorXd& a2, const bloch::Observable& o,
                        const std::vector<double>& delta, double slack = 1e-12);

enum class AsymptoticClass { kUniqueAsymptotic, kInitialStateDependent, kNonStationary };

const char* to_string(AsymptoticClass c);

struct AsymptoticOptions {
  double window_fraction{0.2};   // trailing fraction of the run used as "late time"
  double tol_stationary{1e-3};   // max allowed fluctuation of S_j and b over the window
  double tol_zero{1e-2};         // singular values below this count as vanished
};

struct AsymptoticReport {
  AsymptoticClass classification{AsymptoticClass::kNonStationary};
  Eigen::MatrixXd m_inf;  // trailing-window means (meaningful when stationary)
  Eigen::VectorXd b_inf;
  Eigen::VectorXd s_inf;
  double max_fluctuation_s{0.0};
  double max_fluctuation_b{0.0};
  int rank{0};  // singular values of the window mean above tol_zero
  std::size_t window_begin{0};
};

// Throws AnalysisError when the window has fewer than two samples.
AsymptoticReport classify_asymptotics(const SvdSeries& svd, AsymptoticOptions opt = {});

// Rank-1 factorization m_inf = s1 v1 w1^T; only valid for a stationary report with
// exactly one surviving singular value (throws AnalysisError otherwise).
struct RankOneProjection {
  double s1{0.0};
  Eigen::VectorXd v1, w1;
};

RankOneProjection asymptotic_projection(const AsymptoticReport& report,
                                        double tol_zero = 1e-2);

// Late-time Bloch vector m_inf a0 + b_inf; requires a stationary classification.
Eigen::VectorXd asymptotic_state(const AsymptoticReport& report, const Eigen::VectorXd& a0);

}  // namespace spinmap::dynmap

// bloch.hpp — generalized Bloch-vector parameterization of N-level density matrices.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace spinmap::bloch {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXd;

// Traceless Hermitian su(N) generators T_n, normalized tr(T_n T_m) = 2 delta_nm.
// For N = 2 the set is exactly (sigma_x, sigma_y, sigma_z); for larger N the
// generalized Gell-Mann construction (pairwise real/imaginary, then diagonal).
// Count is N^2 - 1. Throws std::invalid_argument for N < 2.
class GeneratorSet {
 public:
  explicit GeneratorSet(int n);

  int hilbert_dim() const { return n_; }
  std::size_t size() const { return gens_.size(); }
  const Matrix& operator[](std::size_t i) const { return gens_.at(i); }
  const std::vector<Matrix>& all() const { return gens_; }

 private:
  int n_;
  std::vector<Matrix> gens_;
};

// N x N density matrix. Construction validates Hermiticity and unit trace to tol;
// positivity is *not* enforced here (maps can produce unphysical images) — use
// is_positive() where it matters.
class DensityMatrix {
 public:
  static DensityMatrix from_matrix(Matrix rho, double tol = 1e-10);

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  bool is_positive(double tol = 1e-10) const;  // all eigenvalues >= -tol
  double purity() const;                       // tr(rho^2), real part

 private:
  explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
  Matrix m_;
};

// Hermitian observable with its spectral radius cached (largest |eigenvalue|).
class Observable {
 public:
  static Observable from_matrix(Matrix o, double tol = 1e-10);

  const Matrix& matrix() const { return m_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  double max_abs_eigenvalue() const { return o_max_; }

 private:
  Observable(Matrix m, double o_max) : m_(std::move(m)), o_max_(o_max) {}
  Matrix m_;
  double o_max_;
};

// Real coefficient vector a_n = tr(rho T_n), length N^2 - 1.
using BlochVector = Vector;

// rho -> a. Generators must match rho's dimension.
BlochVector density_to_bloch(const DensityMatrix& rho, const GeneratorSet& gens);
BlochVector density_to_bloch(const DensityMatrix& rho);

// a -> rho = 1/N + (1/2) sum_n a_n T_n. Hermitian with unit trace by construction;
// positivity is the caller's concern (guaranteed only for ||a|| <= inner_sphere_radius).
DensityMatrix bloch_to_density(const BlochVector& a, const GeneratorSet& gens);
DensityMatrix bloch_to_density(const BlochVector& a);

// Radius sqrt(2 / (N(N-1))) of the ball of coefficient vectors that always map to
// positive-semidefinite states.
double inner_sphere_radius(int n);

// Pure spin-1/2 state cos(theta/2)|0> + e^{i phi} sin(theta/2)|1> as a density matrix.
DensityMatrix spin_state(double theta, double phi);

// Re tr(O rho); throws std::invalid_argument on dimension mismatch.
double expectation(const Observable& o, const DensityMatrix& rho);

// Hermiticity test helper used across modules.
bool is_hermitian(const Matrix& m, double tol = 1e-10);

}  // namespace spinmap::bloch

#include "spinmap/bloch.hpp"

#include <cmath>
#include <stdexcept>

namespace spinmap::bloch {

namespace {
constexpr Complex kI{0.0, 1.0};
}

GeneratorSet::GeneratorSet(int n) : n_(n) {
  if (n < 2) throw std::invalid_argument("GeneratorSet: need dimension >= 2");
  gens_.reserve(static_cast<std::size_t>(n) * n - 1);
  // Pairwise generators: (|j><k| + |k><j|) and -i(|j><k| - |k><j|) for j < k.
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Matrix sym = Matrix::Zero(n, n);
      sym(j, k) = 1.0;
      sym(k, j) = 1.0;
      gens_.push_back(sym);
      Matrix asym = Matrix::Zero(n, n);
      asym(j, k) = -kI;
      asym(k, j) = kI;
      gens_.push_back(asym);
    }
  }
  // Diagonal generators: sqrt(2/(l(l+1))) (sum_{j<l} |j><j| - l |l><l|).
  for (int l = 1; l < n; ++l) {
    Matrix diag = Matrix::Zero(n, n);
    const double norm = std::sqrt(2.0 / (static_cast<double>(l) * (l + 1)));
    for (int j = 0; j < l; ++j) diag(j, j) = norm;
    diag(l, l) = -norm * l;
    gens_.push_back(diag);
  }
}

bool is_hermitian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

DensityMatrix DensityMatrix::from_matrix(Matrix rho, double tol) {
  if (rho.rows() != rho.cols() || rho.rows() < 2)
    throw std::invalid_argument("DensityMatrix: need square matrix of dim >= 2");
  if (!is_hermitian(rho, tol))
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian within tolerance");
  if (std::abs(rho.trace() - Complex{1.0, 0.0}) > tol)
    throw std::invalid_argument("DensityMatrix: trace differs from 1 beyond tolerance");
  return DensityMatrix(std::move(rho));
}

bool DensityMatrix::is_positive(double tol) const {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -tol;
}

double DensityMatrix::purity() const { return (m_ * m_).trace().real(); }

Observable Observable::from_matrix(Matrix o, double tol) {
  if (o.rows() != o.cols() || o.rows() < 2)
    throw std::invalid_argument("Observable: need square matrix of dim >= 2");
  if (!is_hermitian(o, tol))
    throw std::invalid_argument("Observable: matrix is not Hermitian within tolerance");
  Eigen::SelfAdjointEigenSolver<Matrix> es(o, Eigen::EigenvaluesOnly);
  const double o_max = es.eigenvalues().cwiseAbs().maxCoeff();
  return Observable(std::move(o), o_max);
}

BlochVector density_to_bloch(const DensityMatrix& rho, const GeneratorSet& gens) {
  if (gens.hilbert_dim() != rho.dim())
    throw std::invalid_argument("density_to_bloch: generator/state dimension mismatch");
  BlochVector a(static_cast<Eigen::Index>(gens.size()));
  for (std::size_t n = 0; n < gens.size(); ++n)
    a(static_cast<Eigen::Index>(n)) = (gens[n] * rho.matrix()).trace().real();
  return a;
}

BlochVector density_to_bloch(const DensityMatrix& rho) {
  return density_to_bloch(rho, GeneratorSet(rho.dim()));
}

DensityMatrix bloch_to_density(const BlochVector& a, const GeneratorSet& gens) {
  if (static_cast<std::size_t>(a.size()) != gens.size())
    throw std::invalid_argument("bloch_to_density: coefficient count does not match generators");
  const int n = gens.hilbert_dim();
  Matrix rho = Matrix::Identity(n, n) / static_cast<double>(n);
  for (std::size_t k = 0; k < gens.size(); ++k)
    rho += 0.5 * a(static_cast<Eigen::Index>(k)) * gens[k];
  return DensityMatrix::from_matrix(std::move(rho));
}

DensityMatrix bloch_to_density(const BlochVector& a) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(a.size()) + 1.0)));
  if (static_cast<Eigen::Index>(n) * n - 1 != a.size())
    throw std::invalid_argument("bloch_to_density: length is not N^2-1 for integer N");
  return bloch_to_density(a, GeneratorSet(n));
}

double inner_sphere_radius(int n) {
  if (n < 2) throw std::invalid_argument("inner_sphere_radius: need dimension >= 2");
  return std::sqrt(2.0 / (static_cast<double>(n) * (n - 1)));
}

DensityMatrix spin_state(double theta, double phi) {
  Eigen::Vector2cd psi;
  psi << std::cos(theta / 2.0), std::exp(kI * phi) * std::sin(theta / 2.0);
  Matrix rho = psi * psi.adjoint();
  return DensityMatrix::from_matrix(std::move(rho));
}

double expectation(const Observable& o, const DensityMatrix& rho) {
  if (o.dim() != rho.dim())
    throw std::invalid_argument("expectation: observable/state dimension mismatch");
  return (o.matrix() * rho.matrix()).trace().real();
}

}  // namespace spinmap::bloch

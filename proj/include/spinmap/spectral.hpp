// spectral.hpp — bath spectral densities and their discretization into finite mode sets.
#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace spinmap::spectral {

// J(w) = (pi/2) * alpha * w * exp(-w / omega_c). Throws std::domain_error for w < 0.
struct OhmicDensity {
  double alpha{0.0};    // dimensionless coupling
  double omega_c{1.0};  // cutoff frequency

  double value(double omega) const;
};

// J(w) = alpha * (pi/4) * a * (w - b) * exp(-((w - b)/c)^3) on [omega_min, omega_max],
// zero outside. Defaults: omega_min = b, omega_max = b + 3c. The peak sits at
// b + c * 3^{-1/3}.
struct GappedDensity {
  double alpha{0.0};
  double a{0.677};
  double b{0.541};
  double c{1.280};
  double omega_min{0.0};  // <= 0 means "use b"
  double omega_max{0.0};  // <= 0 means "use b + 3c"

  double lower() const { return omega_min > 0.0 ? omega_min : b; }
  double upper() const { return omega_max > 0.0 ? omega_max : b + 3.0 * c; }
  double peak_frequency() const;
  double value(double omega) const;

  // Same density with all frequencies rescaled by 1/lambda (J itself scales as 1/lambda).
  // Used to express trap-unit parameters in units of the tunneling amplitude, where
  // lambda = peak_frequency() / (2 Delta).
  GappedDensity rescaled(double lambda) const;
};

using SpectralDensity = std::variant<OhmicDensity, GappedDensity>;

double density_value(const SpectralDensity& d, double omega);

// [lo, hi] over which the density is meaningfully supported; Ohmic uses [0, 6 omega_c].
std::pair<double, double> default_range(const SpectralDensity& d);

// Finite bath: mode frequencies (ascending, positive) and coupling amplitudes c_n >= 0
// such that (pi/2) sum_n (c_n^2 / w_n) delta(w - w_n) represents J on the bin grid.
struct DiscretizedBath {
  std::vector<double> omega;
  std::vector<double> coupling;

  int n_modes() const { return static_cast<int>(omega.size()); }
  bool is_empty() const;  // every coupling identically zero
};

// Equidistant bin midpoints on [lo, hi]: w_n at bin centers, c_n^2 = (2/pi) J(w_n) w_n dw.
// Throws std::invalid_argument for bad bounds / n_modes < 1 and std::domain_error if J < 0
// anywhere on the grid.
DiscretizedBath discretize(const std::function<double(double)>& j, int n_modes, double lo,
                           double hi);
DiscretizedBath discretize(const SpectralDensity& d, int n_modes);
DiscretizedBath discretize(const SpectralDensity& d, int n_modes, double lo, double hi);

// Adaptive Gauss-Kronrod integral of f over [lo, hi].
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double tol = 1e-12);

// Relative errors of the discrete moments against the continuum integrals over [lo, hi]:
// first = integral of J dw vs (pi/2) sum c_n^2 / w_n, second = integral of J/w dw vs
// (pi/2) sum c_n^2 / w_n^2. Zero-norm integrals report absolute error instead.
struct SumRuleReport {
  double integral_j = 0.0;
  double discrete_j = 0.0;
  double integral_j_over_w = 0.0;
  double discrete_j_over_w = 0.0;
  double rel_error_j = 0.0;
  double rel_error_j_over_w = 0.0;
};

SumRuleReport sum_rule_check(const DiscretizedBath& bath, const std::function<double(double)>& j,
                             double lo, double hi);
SumRuleReport sum_rule_check(const DiscretizedBath& bath, const SpectralDensity& d, double lo,
                             double hi);

}  // namespace spinmap::spectral

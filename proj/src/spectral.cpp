#include "spinmap/spectral.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spinmap::spectral {

namespace {
constexpr double kPi = std::numbers::pi;
}

double OhmicDensity::value(double omega) const {
  if (omega < 0.0) throw std::domain_error("OhmicDensity: negative frequency");
  if (omega_c <= 0.0) throw std::domain_error("OhmicDensity: cutoff must be positive");
  return 0.5 * kPi * alpha * omega * std::exp(-omega / omega_c);
}

double GappedDensity::peak_frequency() const { return b + c * std::pow(3.0, -1.0 / 3.0); }

double GappedDensity::value(double omega) const {
  if (omega < 0.0) throw std::domain_error("GappedDensity: negative frequency");
  if (c <= 0.0) throw std::domain_error("GappedDensity: width parameter must be positive");
  if (omega < lower() || omega > upper()) return 0.0;
  const double u = (omega - b) / c;
  return alpha * 0.25 * kPi * a * (omega - b) * std::exp(-u * u * u);
}

GappedDensity GappedDensity::rescaled(double lambda) const {
  if (lambda <= 0.0) throw std::invalid_argument("GappedDensity::rescaled: lambda must be > 0");
  GappedDensity out = *this;
  out.b = b / lambda;
  out.c = c / lambda;
  out.omega_min = lower() / lambda;
  out.omega_max = upper() / lambda;
  return out;
}

double density_value(const SpectralDensity& d, double omega) {
  return std::visit([omega](const auto& dd) { return dd.value(omega); }, d);
}

std::pair<double, double> default_range(const SpectralDensity& d) {
  if (const auto* o = std::get_if<OhmicDensity>(&d)) return {0.0, 6.0 * o->omega_c};
  const auto& g = std::get<GappedDensity>(d);
  return {g.lower(), g.upper()};
}

bool DiscretizedBath::is_empty() const {
  for (double c : coupling)
    if (c != 0.0) return false;
  return true;
}

DiscretizedBath discretize(const std::function<double(double)>& j, int n_modes, double lo,
                           double hi) {
  if (n_modes < 1) throw std::invalid_argument("discretize: need at least one mode");
  if (!(lo >= 0.0) || !(hi > lo))
    throw std::invalid_argument("discretize: need 0 <= lo < hi");
  const double dw = (hi - lo) / n_modes;
  DiscretizedBath bath;
  bath.omega.reserve(n_modes);
  bath.coupling.reserve(n_modes);
  for (int n = 0; n < n_modes; ++n) {
    const double w = lo + (n + 0.5) * dw;
    const double jw = j(w);
    if (jw < 0.0) throw std::domain_error("discretize: spectral density negative on grid");
    bath.omega.push_back(w);
    bath.coupling.push_back(std::sqrt(2.0 / kPi * jw * w * dw));
  }
  return bath;
}

DiscretizedBath discretize(const SpectralDensity& d, int n_modes) {
  auto [lo, hi] = default_range(d);
  if (const auto* o = std::get_if<OhmicDensity>(&d)) {
    (void)o;
    lo = hi / n_modes;  // keep the lowest bin away from w = 0
  }
  return discretize(d, n_modes, lo, hi);
}

DiscretizedBath discretize(const SpectralDensity& d, int n_modes, double lo, double hi) {
  return discretize([&d](double w) { return density_value(d, w); }, n_modes, lo, hi);
}

double integrate(const std::function<double(double)>& f, double lo, double hi, double tol) {
  if (hi == lo) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, lo, hi, 15, tol);
}

SumRuleReport sum_rule_check(const DiscretizedBath& bath, const std::function<double(double)>& j,
                             double lo, double hi) {
  SumRuleReport r;
  r.integral_j = integrate(j, lo, hi);
  r.integral_j_over_w = integrate([&j](double w) { return j(w) / w; }, lo, hi);
  for (int n = 0; n < bath.n_modes(); ++n) {
    const double c2 = bath.coupling[n] * bath.coupling[n];
    r.discrete_j += 0.5 * kPi * c2 / bath.omega[n];
    r.discrete_j_over_w += 0.5 * kPi * c2 / (bath.omega[n] * bath.omega[n]);
  }
  auto rel = [](double approx, double exact) {
    const double scale = std::abs(exact);
    return scale > 0.0 ? std::abs(approx - exact) / scale : std::abs(approx - exact);
  };
  r.rel_error_j = rel(r.discrete_j, r.integral_j);
  r.rel_error_j_over_w = rel(r.discrete_j_over_w, r.integral_j_over_w);
  return r;
}

SumRuleReport sum_rule_check(const DiscretizedBath& bath, const SpectralDensity& d, double lo,
                             double hi) {
  return sum_rule_check(bath, [&d](double w) { return density_value(d, w); }, lo, hi);
}

}  // namespace spinmap::spectral

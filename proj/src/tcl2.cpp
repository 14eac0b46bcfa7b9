#include "spinmap/tcl2.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spinmap/errors.hpp"

namespace spinmap::tcl2 {

namespace {
constexpr double kPi = std::numbers::pi;
}

double renormalized_frequency(double delta, const Rates& r) {
  if (delta <= 0.0) throw std::invalid_argument("renormalized_frequency: delta must be > 0");
  const double disc = 8.0 * delta * (2.0 * delta - r.gamma_yz) - r.gamma_yy * r.gamma_yy;
  if (disc <= 0.0)
    throw RegimeError(
        "renormalized_frequency: overdamped rates (8 Delta (2 Delta - gamma_yz) <= gamma_yy^2); "
        "the oscillatory closed forms do not apply");
  return 0.5 * std::sqrt(disc);
}

Eigen::Matrix3d analytic_m(double delta, const Rates& r, double t) {
  const double dt = renormalized_frequency(delta, r);
  const double c = std::cos(dt * t), s = std::sin(dt * t);
  const double env = std::exp(-0.5 * r.gamma_yy * t);
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  m(0, 0) = std::exp(-r.gamma_xx * t);
  m(1, 1) = env * (c - 0.5 * r.gamma_yy / dt * s);
  m(1, 2) = -env * (2.0 * delta - r.gamma_yz) / dt * s;
  m(2, 1) = env * 2.0 * delta / dt * s;
  m(2, 2) = env * (c + 0.5 * r.gamma_yy / dt * s);
  return m;
}

Eigen::Vector3d analytic_b(double delta, const Rates& r, double t) {
  (void)delta;
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  if (r.gamma_xx != 0.0)
    b(0) = -r.gamma_x / r.gamma_xx * (1.0 - std::exp(-r.gamma_xx * t));
  else
    b(0) = -r.gamma_x * t;  // gamma_xx -> 0 limit of the same expression
  return b;
}

SingularValueTriple analytic_singular_values(double delta, const Rates& r, double t) {
  const double dt = renormalized_frequency(delta, r);
  const double c = std::cos(dt * t), s = std::sin(dt * t);
  SingularValueTriple out;
  out.a = std::sqrt(4.0 * c * c + std::pow((4.0 * delta - r.gamma_yz) / dt * s, 2));
  out.b = 1.0;
  const double root =
      std::sqrt(r.gamma_yy * r.gamma_yy + r.gamma_yz * r.gamma_yz) / dt * std::abs(s);
  const double env = std::exp(-0.5 * r.gamma_yy * t);
  out.s_plus = 0.5 * env * (out.a + root);
  out.s_minus = 0.5 * env * (out.a - root);
  out.s_x = std::exp(-r.gamma_xx * t);
  return out;
}

namespace {

using State = std::array<double, 3>;

struct BlochRhs {
  double delta;
  RateCallback rates;

  void operator()(const State& a, State& dadt, double t) const {
    const Rates r = rates(t);
    dadt[0] = -r.gamma_xx * a[0] - r.gamma_x;
    dadt[1] = -(2.0 * delta - r.gamma_yz) * a[2] - r.gamma_yy * a[1];
    dadt[2] = 2.0 * delta * a[1];
  }
};

}  // namespace

BlochTrajectory solve_ode(double delta, const RateCallback& rates, const Eigen::Vector3d& a0,
                          const std::vector<double>& times) {
  if (times.empty()) throw std::invalid_argument("solve_ode: empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] <= times[i - 1])
      throw std::invalid_argument("solve_ode: sample times must be strictly increasing");

  namespace ode = boost::numeric::odeint;
  auto stepper = ode::make_controlled(1e-10, 1e-10, ode::runge_kutta_dopri5<State>());
  BlochRhs rhs{delta, rates};

  BlochTrajectory out;
  out.t = times;
  out.a.reserve(times.size());
  State a{a0(0), a0(1), a0(2)};
  double t = times.front();
  if (t != 0.0) ode::integrate_adaptive(stepper, rhs, a, 0.0, t, 1e-4);
  out.a.emplace_back(a[0], a[1], a[2]);
  for (std::size_t i = 1; i < times.size(); ++i) {
    ode::integrate_adaptive(stepper, rhs, a, t, times[i], 1e-4);
    t = times[i];
    out.a.emplace_back(a[0], a[1], a[2]);
  }
  return out;
}

BlochTrajectory solve_ode(double delta, const Rates& r, const Eigen::Vector3d& a0,
                          const std::vector<double>& times) {
  return solve_ode(
      delta, [r](double) { return r; }, a0, times);
}

BlochTrajectory analytic_trajectory(double delta, const Rates& r, const Eigen::Vector3d& a0,
                                    const std::vector<double>& times) {
  BlochTrajectory out;
  out.t = times;
  out.a.reserve(times.size());
  for (double t : times) out.a.push_back(analytic_m(delta, r, t) * a0 + analytic_b(delta, r, t));
  return out;
}

namespace {

// PV int_lo^hi f(w)/(w - w0) dw for smooth f, with w0 strictly inside (lo, hi):
// symmetric window around w0 integrates the subtracted (regular) part; the log
// counterterm vanishes by symmetry; the remainder is regular.
double principal_value(const std::function<double(double)>& f, double lo, double hi, double w0) {
  const double h = 0.5 * std::min(w0 - lo, hi - w0);
  const double f0 = f(w0);
  const double df0 = (f(w0 + 1e-7) - f(w0 - 1e-7)) / 2e-7;
  auto regularized = [&](double w) {
    const double d = w - w0;
    if (std::abs(d) < 1e-9) return df0;
    return (f(w) - f0) / d;
  };
  double total = spectral::integrate(regularized, w0 - h, w0 + h, 1e-11);
  auto plain = [&](double w) { return f(w) / (w - w0); };
  if (lo < w0 - h) total += spectral::integrate(plain, lo, w0 - h, 1e-11);
  if (w0 + h < hi) total += spectral::integrate(plain, w0 + h, hi, 1e-11);
  return total;
}

}  // namespace

Rates rates_from_spectral_density(const spectral::SpectralDensity& d, double delta) {
  if (delta <= 0.0)
    throw std::invalid_argument("rates_from_spectral_density: delta must be > 0");
  const double w0 = 2.0 * delta;
  auto j = [&d](double w) { return spectral::density_value(d, w); };

  auto [lo, hi] = spectral::default_range(d);
  if (std::holds_alternative<spectral::OhmicDensity>(d)) {
    const double wc = std::get<spectral::OhmicDensity>(d).omega_c;
    lo = 0.0;
    hi = std::max(60.0 * wc, 10.0 * delta);  // integrate essentially the full tail
  }

  Rates r;
  r.gamma_xx = r.gamma_yy = r.gamma_x = 2.0 * j(w0);

  auto f = [&](double w) { return j(w) / (w + w0); };
  double pv = 0.0;
  if (w0 > lo && w0 < hi)
    pv = principal_value(f, lo, hi, w0);
  else if (hi > lo)
    pv = spectral::integrate([&](double w) { return f(w) / (w - w0); }, lo, hi, 1e-11);
  r.gamma_yz = 8.0 * delta / kPi * pv;
  return r;
}

}  // namespace spinmap::tcl2

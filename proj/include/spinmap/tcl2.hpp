// tcl2.hpp — stationary-rate second-order (TCL2) Bloch dynamics for the unbiased spin-boson
// model: closed-form affine map, closed-form singular values, ODE route, and zero-temperature
// rates from a continuum spectral density.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "spinmap/spectral.hpp"

namespace spinmap::tcl2 {

// Stationary relaxation/renormalization coefficients of the Bloch equations
//   d<sx>/dt = -gamma_xx <sx> - gamma_x
//   d<sy>/dt = -(2 Delta - gamma_yz) <sz> - gamma_yy <sy>
//   d<sz>/dt =  2 Delta <sy>
struct Rates {
  double gamma_xx{0.0};
  double gamma_x{0.0};
  double gamma_yy{0.0};
  double gamma_yz{0.0};
};

// Oscillation frequency of the damped (y,z) block:
//   delta_tilde = (1/2) sqrt(8 Delta (2 Delta - gamma_yz) - gamma_yy^2).
// Throws RegimeError when the argument is <= 0 (overdamped — the oscillatory closed
// forms below do not apply; use solve_ode instead).
double renormalized_frequency(double delta, const Rates& r);

// Closed-form affine map a(t) = M(t) a(0) + b(t).
Eigen::Matrix3d analytic_m(double delta, const Rates& r, double t);
Eigen::Vector3d analytic_b(double delta, const Rates& r, double t);

// Closed-form singular values of M(t): the x channel decays as s_x = e^{-gamma_xx t};
// the (y,z) block gives s± = (e^{-gamma_yy t/2}/2)(A ± sqrt(A^2 - 4B)) with
//   A(t) = sqrt(4 cos^2(dt t) + ((4 Delta - gamma_yz)/dt)^2 sin^2(dt t)),   B = 1,
//   sqrt(A^2 - 4B) = (sqrt(gamma_yy^2 + gamma_yz^2)/dt) |sin(dt t)|,
// where dt = renormalized_frequency. A(0) = 2, and s+ s- = e^{-gamma_yy t} (the block's
// determinant) holds identically.
struct SingularValueTriple {
  double s_plus{1.0};
  double s_minus{1.0};
  double s_x{1.0};
  double a{2.0};  // A(t)
  double b{1.0};  // B(t)
};

SingularValueTriple analytic_singular_values(double delta, const Rates& r, double t);

// Bloch trajectory on explicit sample times.
struct BlochTrajectory {
  std::vector<double> t;
  std::vector<Eigen::Vector3d> a;
};

// Adaptive dopri5 integration of the Bloch equations (abs/rel tolerance 1e-10). The
// callback overload is the extension point for time-dependent rates Gamma(t); the
// plain overload uses stationary rates.
using RateCallback = std::function<Rates(double)>;

BlochTrajectory solve_ode(double delta, const Rates& r, const Eigen::Vector3d& a0,
                          const std::vector<double>& times);
BlochTrajectory solve_ode(double delta, const RateCallback& rates, const Eigen::Vector3d& a0,
                          const std::vector<double>& times);

// Convenience: closed-form trajectory on the same grid (oscillatory regime only).
BlochTrajectory analytic_trajectory(double delta, const Rates& r, const Eigen::Vector3d& a0,
                                    const std::vector<double>& times);

// Zero-temperature long-time TCL2 coefficients from a continuum spectral density:
//   gamma_xx = gamma_yy = gamma_x = 2 J(2 Delta)           (resonant half-Fourier limit)
//   gamma_yz = (8 Delta / pi) PV int J(w) / (w^2 - 4 Delta^2) dw
// The principal value is evaluated by symmetric subtraction around w = 2 Delta plus
// adaptive quadrature elsewhere. All rates are linear in the density's amplitude.
Rates rates_from_spectral_density(const spectral::SpectralDensity& d, double delta);

}  // namespace spinmap::tcl2

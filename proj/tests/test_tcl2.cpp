#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "spinmap/errors.hpp"
#include "spinmap/propagator.hpp"
#include "spinmap/spectral.hpp"
#include "spinmap/tcl2.hpp"
#include "test_helpers.hpp"

using namespace spinmap;
using namespace spinmap::tcl2;

namespace {

constexpr double kPi = 3.14159265358979323846;

Rates random_oscillatory_rates(std::mt19937_64& g, double delta) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    Rates r;
    r.gamma_xx = 0.8 * u(g);
    r.gamma_x = 0.8 * u(g) - 0.4;
    r.gamma_yy = 0.8 * u(g);
    r.gamma_yz = 1.2 * u(g) - 0.6;
    const double disc = 8.0 * delta * (2.0 * delta - r.gamma_yz) - r.gamma_yy * r.gamma_yy;
    if (disc > 0.5) return r;  // keep well inside the oscillatory regime
  }
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = lo + (hi - lo) * i / (n - 1);
  return t;
}

}  // namespace

TEST_CASE("renormalized frequency reproduces pinned values and rejects overdamped rates") {
  CHECK(renormalized_frequency(1.0, Rates{}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(renormalized_frequency(1.0, Rates{0.0, 0.0, 0.2, 0.1}) ==
        doctest::Approx(0.5 * std::sqrt(15.16)).epsilon(1e-15));
  CHECK_THROWS_AS(renormalized_frequency(1.0, Rates{0.0, 0.0, 0.0, 2.0}), RegimeError);
  CHECK_THROWS_AS(renormalized_frequency(1.0, Rates{0.0, 0.0, 4.1, 0.0}), RegimeError);
}

TEST_CASE("affine map starts at the identity with zero offset") {
  const Rates r{0.3, 0.1, 0.25, 0.15};
  CHECK((analytic_m(1.0, r, 0.0) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(analytic_b(1.0, r, 0.0).norm() < 1e-15);
}

TEST_CASE("zero rates reduce to the bare rotation about x") {
  const Rates r{};
  const double delta = 0.7;
  for (double t : {0.0, 0.3, 1.1, 2.9}) {
    Eigen::Matrix3d want = Eigen::Matrix3d::Zero();
    want(0, 0) = 1.0;
    want(1, 1) = std::cos(2 * delta * t);
    want(1, 2) = -std::sin(2 * delta * t);
    want(2, 1) = std::sin(2 * delta * t);
    want(2, 2) = std::cos(2 * delta * t);
    CHECK((analytic_m(delta, r, t) - want).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(analytic_b(delta, r, t).norm() < 1e-15);

    const SingularValueTriple sv = analytic_singular_values(delta, r, t);
    CHECK(sv.s_plus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sv.s_minus == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sv.s_x == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("closed-form map matches adaptive ODE integration on random rate draws") {
  std::mt19937_64 g(2024);
  const double delta = 1.0;
  const std::vector<double> times = linspace(0.0, 10.0, 41);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const Rates r = random_oscillatory_rates(g, delta);
    const Eigen::Vector3d a0 = testutil::random_in_ball3(g);
    const BlochTrajectory ode = solve_ode(delta, r, a0, times);
    const BlochTrajectory closed = analytic_trajectory(delta, r, a0, times);
    for (std::size_t k = 0; k < times.size(); ++k)
      worst = std::max(worst, (ode.a[k] - closed.a[k]).norm());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("closed-form singular values match a dense SVD of the closed-form map") {
  std::mt19937_64 g(99);
  const double delta = 1.0;
  std::uniform_real_distribution<double> ut(0.0, 12.0);
  double worst = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const Rates r = random_oscillatory_rates(g, delta);
    const double t = ut(g);
    const SingularValueTriple sv = analytic_singular_values(delta, r, t);

    Eigen::Vector3d mine(sv.s_plus, sv.s_minus, sv.s_x);
    std::sort(mine.data(), mine.data() + 3, std::greater<double>());
    const Eigen::Vector3d numeric =
        Eigen::JacobiSVD<Eigen::Matrix3d>(analytic_m(delta, r, t)).singularValues();
    worst = std::max(worst, (mine - numeric).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("singular value identities hold along the whole series") {
  const double delta = 1.0;
  const Rates r{0.568526, 0.568526, 0.568526, 0.696605};
  for (double t : linspace(0.0, 12.0, 97)) {
    const SingularValueTriple sv = analytic_singular_values(delta, r, t);
    CHECK(sv.b == doctest::Approx(1.0));
    CHECK(sv.a >= 2.0 - 1e-12);
    // determinant of the damped block: s+ s- = e^{-gamma_yy t}
    CHECK(sv.s_plus * sv.s_minus ==
          doctest::Approx(std::exp(-r.gamma_yy * t)).epsilon(1e-11));
    CHECK(sv.s_x == doctest::Approx(std::exp(-r.gamma_xx * t)).epsilon(1e-13));
  }
  const SingularValueTriple at0 = analytic_singular_values(delta, r, 0.0);
  CHECK(at0.a == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(at0.s_plus == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(at0.s_minus == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("envelope-compensated singular values are periodic with period pi / dtilde") {
  const double delta = 1.0;
  const Rates r{0.3, 0.0, 0.4, 0.2};
  const double period = kPi / renormalized_frequency(delta, r);
  auto compensated = [&](double t) {
    const SingularValueTriple sv = analytic_singular_values(delta, r, t);
    return std::exp(0.5 * r.gamma_yy * t) * sv.s_plus;
  };
  for (double t : {0.1, 0.9, 1.7, 3.3})
    CHECK(compensated(t) == doctest::Approx(compensated(t + period)).epsilon(1e-10));
}

TEST_CASE("offset relaxes toward -gamma_x/gamma_xx and handles the gamma_xx -> 0 limit") {
  const Rates r{0.4, 0.12, 0.3, 0.1};
  const Eigen::Vector3d b_late = analytic_b(1.0, r, 80.0);
  CHECK(b_late(0) == doctest::Approx(-0.12 / 0.4).epsilon(1e-10));
  CHECK(b_late(1) == 0.0);
  CHECK(b_late(2) == 0.0);

  // the same fixed point emerges from the ODE without closed forms; the slowest
  // transient decays as e^{-gamma_yy t / 2} so t = 140 leaves ~1e-9
  const BlochTrajectory ode =
      solve_ode(1.0, r, Eigen::Vector3d(0.3, -0.2, 0.8), linspace(0.0, 140.0, 11));
  CHECK((ode.a.back() - Eigen::Vector3d(-0.3, 0.0, 0.0)).norm() < 1e-7);

  const Rates drift_only{0.0, 0.05, 0.0, 0.0};
  CHECK(analytic_b(1.0, drift_only, 2.0)(0) == doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("rates derived from a spectral density obey closed-form and scaling checks") {
  const double delta = 1.0;
  const spectral::SpectralDensity ohmic = spectral::OhmicDensity{0.1, 20.0};
  const Rates r = rates_from_spectral_density(ohmic, delta);

  SUBCASE("resonant rates equal twice the density at the splitting frequency") {
    const double j2d = spectral::density_value(ohmic, 2.0 * delta);
    CHECK(r.gamma_xx == doctest::Approx(2.0 * j2d).epsilon(1e-13));
    CHECK(r.gamma_yy == doctest::Approx(2.0 * j2d).epsilon(1e-13));
    CHECK(r.gamma_x == doctest::Approx(2.0 * j2d).epsilon(1e-13));
    CHECK(r.gamma_xx == doctest::Approx(0.2 * kPi * std::exp(-0.1)).epsilon(1e-13));
  }

  SUBCASE("principal value matches an independent subtracted Simpson oracle") {
    const double w0 = 2.0 * delta;
    const auto j = [&](double w) { return spectral::density_value(ohmic, w); };
    const auto f = [&](double w) { return j(w) / (w + w0); };
    // PV int j/(w^2 - w0^2) over [0, hi] = int (f(w) - f(w0))/(w - w0) + f(w0) log((hi-w0)/w0)
    const double hi = 1200.0;
    const double fw0 = f(w0);
    const double core = testutil::simpson(
        [&](double w) {
          return std::abs(w - w0) < 1e-8 ? (f(w0 + 1e-6) - f(w0 - 1e-6)) / 2e-6
                                         : (f(w) - fw0) / (w - w0);
        },
        0.0, hi, 400000);
    const double pv = core + fw0 * std::log((hi - w0) / w0);
    CHECK(r.gamma_yz == doctest::Approx((8.0 * delta / kPi) * pv).epsilon(1e-6));
    CHECK(r.gamma_yz == doctest::Approx(0.696605).epsilon(1e-4));
  }

  SUBCASE("all rates are linear in the coupling strength") {
    const Rates r2 =
        rates_from_spectral_density(spectral::SpectralDensity{spectral::OhmicDensity{0.2, 20.0}},
                                    delta);
    CHECK(r2.gamma_xx == doctest::Approx(2.0 * r.gamma_xx).epsilon(1e-12));
    CHECK(r2.gamma_yz == doctest::Approx(2.0 * r.gamma_yz).epsilon(1e-10));
  }

  SUBCASE("zero coupling gives vanishing rates") {
    const Rates zero =
        rates_from_spectral_density(spectral::SpectralDensity{spectral::OhmicDensity{0.0, 20.0}},
                                    delta);
    CHECK(zero.gamma_xx == 0.0);
    CHECK(zero.gamma_yy == 0.0);
    CHECK(zero.gamma_x == 0.0);
    CHECK(std::abs(zero.gamma_yz) < 1e-15);
  }
}

TEST_CASE("gapped density with the resonance outside its support gives a purely reactive rate") {
  // support ends at (0.541 + 3*1.28) = 4.381 < 2*delta = 6
  const spectral::SpectralDensity gapped =
      spectral::GappedDensity{0.1, 0.677, 0.541, 1.280, 0.0, 0.0};
  const Rates r = rates_from_spectral_density(gapped, 3.0);
  CHECK(r.gamma_xx == 0.0);
  CHECK(r.gamma_yy == 0.0);
  CHECK(r.gamma_x == 0.0);
  CHECK(r.gamma_yz < 0.0);  // all spectral weight below resonance pushes the shift negative
  CHECK(std::isfinite(r.gamma_yz));
}

TEST_CASE("weak-coupling rates track exact propagation of a small bath") {
  // few-mode bath at weak coupling: the second-order theory should follow <sz>(t)
  // from exact joint propagation to a few percent over several tunneling periods
  const double delta = 1.0;
  const spectral::SpectralDensity ohmic = spectral::OhmicDensity{0.05, 1.0};
  const auto [lo, hi] = spectral::default_range(ohmic);
  const spectral::DiscretizedBath bath = spectral::discretize(ohmic, 8, lo / 8, hi);

  const auto space = propagator::HilbertSpaceSpec::uniform(bath, 3);
  const auto h = propagator::build_hamiltonian(space, delta);
  const propagator::TimeGrid grid{0.005, 600, 30};
  const propagator::Trajectory up = propagator::run_state_trajectory(h, 0.0, 0.0, grid, "up");

  const Rates r = rates_from_spectral_density(ohmic, delta);
  const BlochTrajectory weak = solve_ode(delta, r, Eigen::Vector3d(0.0, 0.0, 1.0), up.t);

  double worst = 0.0;
  for (std::size_t k = 0; k < up.t.size(); ++k) {
    const double sz_exact = (up.rho[k](0, 0) - up.rho[k](1, 1)).real();
    worst = std::max(worst, std::abs(sz_exact - weak.a[k](2)));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("callback route reproduces stationary rates and supports time dependence") {
  const double delta = 1.0;
  const Rates r{0.2, 0.05, 0.3, 0.1};
  const std::vector<double> times = linspace(0.0, 6.0, 25);
  const Eigen::Vector3d a0(0.2, -0.4, 0.6);

  const BlochTrajectory fixed = solve_ode(delta, r, a0, times);
  const BlochTrajectory via_callback =
      solve_ode(delta, RateCallback([&](double) { return r; }), a0, times);
  for (std::size_t k = 0; k < times.size(); ++k)
    CHECK((fixed.a[k] - via_callback.a[k]).norm() < 1e-12);

  // ramped rates must differ from the stationary solution
  const BlochTrajectory ramped = solve_ode(
      delta,
      RateCallback([&](double t) {
        Rates rt = r;
        rt.gamma_yy = r.gamma_yy * std::min(1.0, t / 3.0);
        return rt;
      }),
      a0, times);
  CHECK((ramped.a.back() - fixed.a.back()).norm() > 1e-3);
}

TEST_CASE("ode solver rejects non-increasing sample grids") {
  CHECK_THROWS_AS(solve_ode(1.0, Rates{}, Eigen::Vector3d::UnitZ(), {0.0, 1.0, 1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_ode(1.0, Rates{}, Eigen::Vector3d::UnitZ(), {}),
                  std::invalid_argument);
}

#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "spinmap/spectral.hpp"
#include "test_helpers.hpp"

using namespace spinmap::spectral;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("ohmic density matches its closed form and peaks at the cutoff") {
  const OhmicDensity j{0.3, 2.0};
  CHECK(j.value(0.0) == 0.0);
  CHECK(j.value(2.0) == doctest::Approx(0.5 * kPi * 0.3 * 2.0 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(j.value(5.0) == doctest::Approx(0.5 * kPi * 0.3 * 5.0 * std::exp(-2.5)).epsilon(1e-15));
  CHECK_THROWS_AS(j.value(-0.1), std::domain_error);

  // d/dw [w e^{-w/wc}] = 0 exactly at w = wc; confirm with a derivative-free maximizer
  const double peak = testutil::golden_max([&](double w) { return j.value(w); }, 0.0, 12.0);
  CHECK(peak == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("gapped density vanishes outside its support and peaks at b + c/3^(1/3)") {
  const GappedDensity j{0.1, 0.677, 0.541, 1.280, 0.0, 0.0};
  CHECK(j.lower() == doctest::Approx(0.541));
  CHECK(j.upper() == doctest::Approx(0.541 + 3 * 1.280));
  CHECK(j.value(0.0) == 0.0);
  CHECK(j.value(0.540) == 0.0);
  CHECK(j.value(j.upper() + 1e-9) == 0.0);

  const double analytic_peak = 0.541 + 1.280 * std::pow(3.0, -1.0 / 3.0);
  CHECK(j.peak_frequency() == doctest::Approx(analytic_peak).epsilon(1e-14));
  const double numeric_peak =
      testutil::golden_max([&](double w) { return j.value(w); }, j.lower(), j.upper());
  CHECK(numeric_peak == doctest::Approx(analytic_peak).epsilon(1e-6));

  const double x = (analytic_peak - 0.541) / 1.280;
  CHECK(j.value(analytic_peak) ==
        doctest::Approx(0.1 * (kPi / 4) * 0.677 * (analytic_peak - 0.541) * std::exp(-x * x * x))
            .epsilon(1e-14));
}

TEST_CASE("rescaling a gapped density compresses frequencies and preserves shape") {
  const GappedDensity j{0.1, 0.677, 0.541, 1.280, 0.0, 0.0};
  const double lambda = j.peak_frequency() / 2.0;  // put the peak at frequency 2
  const GappedDensity scaled = j.rescaled(lambda);

  CHECK(scaled.peak_frequency() == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(scaled.lower() == doctest::Approx(0.541 / lambda).epsilon(1e-13));
  CHECK(scaled.upper() == doctest::Approx((0.541 + 3 * 1.280) / lambda).epsilon(1e-13));
  // J'(w) = J(lambda w) / lambda pointwise
  for (double w : {0.8, 1.2, 2.0, 3.1, 4.9})
    CHECK(scaled.value(w) == doctest::Approx(j.value(lambda * w) / lambda).epsilon(1e-13));
}

TEST_CASE("single-bin discretization reproduces the midpoint rule exactly") {
  const SpectralDensity d = OhmicDensity{0.25, 1.5};
  const DiscretizedBath bath = discretize(d, 1, 1.0, 3.0);
  REQUIRE(bath.n_modes() == 1);
  CHECK(bath.omega[0] == doctest::Approx(2.0).epsilon(1e-15));
  const double c2 = (2.0 / kPi) * density_value(d, 2.0) * 2.0 * 2.0;
  CHECK(bath.coupling[0] == doctest::Approx(std::sqrt(c2)).epsilon(1e-15));
}

TEST_CASE("discrete moments converge to the continuum integrals") {
  const SpectralDensity ohmic = OhmicDensity{0.3, 1.0};
  const auto j = [&](double w) { return density_value(ohmic, w); };

  SUBCASE("relative error is within 1e-3 at 400 modes for both shapes") {
    const DiscretizedBath bath = discretize(ohmic, 400, 0.0, 10.0);
    const SumRuleReport report = sum_rule_check(bath, ohmic, 0.0, 10.0);
    CHECK(std::abs(report.rel_error_j) < 1e-3);
    CHECK(std::abs(report.rel_error_j_over_w) < 1e-3);

    // cross-check the continuum reference against an independent Simpson oracle
    CHECK(report.integral_j ==
          doctest::Approx(testutil::simpson(j, 0.0, 10.0, 20000)).epsilon(1e-9));

    const SpectralDensity gapped = GappedDensity{0.1, 0.677, 0.541, 1.280, 0.0, 0.0};
    const auto [lo, hi] = default_range(gapped);
    const SumRuleReport gr = sum_rule_check(discretize(gapped, 400, lo, hi), gapped, lo, hi);
    CHECK(std::abs(gr.rel_error_j) < 1e-3);
    CHECK(std::abs(gr.rel_error_j_over_w) < 1e-3);
  }

  SUBCASE("error decreases monotonically under refinement 50 -> 100 -> 200") {
    double prev = 1.0;
    for (int n : {50, 100, 200}) {
      const SumRuleReport report = sum_rule_check(discretize(ohmic, n, 0.0, 10.0), ohmic, 0.0,
                                                  10.0);
      const double err = std::max(std::abs(report.rel_error_j),
                                  std::abs(report.rel_error_j_over_w));
      CHECK(err < prev);
      prev = err;
    }
    CHECK(prev < 2e-4);
  }
}

TEST_CASE("default windows cover the supported region") {
  const auto [olo, ohi] = default_range(SpectralDensity{OhmicDensity{0.2, 5.0}});
  CHECK(olo == 0.0);
  CHECK(ohi == doctest::Approx(30.0));

  const GappedDensity g{0.1, 0.677, 0.541, 1.280, 0.0, 0.0};
  const auto [glo, ghi] = default_range(SpectralDensity{g});
  CHECK(glo == doctest::Approx(g.lower()));
  CHECK(ghi == doctest::Approx(g.upper()));

  // the ohmic convenience overload starts the first bin away from w = 0
  const DiscretizedBath bath = discretize(SpectralDensity{OhmicDensity{0.2, 5.0}}, 6);
  CHECK(bath.omega.front() == doctest::Approx(5.0 + 0.5 * (30.0 - 5.0) / 6).epsilon(1e-12));
}

TEST_CASE("discretization rejects malformed requests") {
  const auto j = [](double w) { return w; };
  CHECK_THROWS_AS(discretize(j, 0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(discretize(j, 4, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(discretize(j, 4, 2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(discretize([](double) { return -1.0; }, 4, 0.0, 1.0), std::domain_error);
}

TEST_CASE("zero coupling flags an empty bath") {
  const DiscretizedBath bath = discretize(SpectralDensity{OhmicDensity{0.0, 5.0}}, 4, 1.0, 9.0);
  CHECK(bath.is_empty());
  for (double c : bath.coupling) CHECK(c == 0.0);

  const DiscretizedBath coupled = discretize(SpectralDensity{OhmicDensity{0.1, 5.0}}, 4, 1.0,
                                             9.0);
  CHECK_FALSE(coupled.is_empty());
}

TEST_CASE("adaptive quadrature hits analytic integrals") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, kPi) ==
        doctest::Approx(2.0).epsilon(1e-13));
  CHECK(integrate([](double x) { return x * std::exp(-x); }, 0.0, 40.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "sclip/errors.hpp"
#include "sclip/quadrature.hpp"

using namespace sclip;

TEST_CASE("simpson integrates cubics exactly") {
  auto cubic = [](double x) { return x * x * x - 2.0 * x + 1.0; };
  // Antiderivative: x^4/4 - x^2 + x.
  const double exact = (16.0 / 4.0 - 4.0 + 2.0) - 0.0;
  CHECK(simpson(cubic, 0.0, 2.0, 2) == doctest::Approx(exact).epsilon(1e-14));
  CHECK(simpson(cubic, 0.0, 2.0, 64) == doctest::Approx(exact).epsilon(1e-14));
}

TEST_CASE("simpson converges on smooth transcendental integrands") {
  auto f = [](double x) { return std::sin(x); };
  CHECK(simpson(f, 0.0, M_PI, 256) == doctest::Approx(2.0).epsilon(1e-10));
  auto g = [](double x) { return std::exp(-x * x); };
  CHECK(simpson(g, -6.0, 6.0, 512) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-10));
}

TEST_CASE("simpsonPiecewise is additive over breakpoints") {
  auto f = [](double x) { return std::cos(x); };
  std::vector<double> bp{0.0, 0.5, 1.0, 2.0};
  const double whole = simpson(f, 0.0, 2.0, 3 * 128);
  const double pieces = simpsonPiecewise(f, bp, 128);
  CHECK(pieces == doctest::Approx(std::sin(2.0)).epsilon(1e-10));
  CHECK(pieces == doctest::Approx(whole).epsilon(1e-10));
}

TEST_CASE("integrateAdaptive reaches tight tolerances") {
  auto f = [](double x) { return 1.0 / (1.0 + x * x); };
  std::vector<double> bp{0.0, 1.0, 10.0, 100.0};
  const double got = integrateAdaptive(f, bp, 16, 1e-12, 0.0);
  CHECK(got == doctest::Approx(std::atan(100.0)).epsilon(1e-11));
}

TEST_CASE("integrateAdaptive throws NonConvergence on a non-integrable spike") {
  // 1/sqrt(|x|) evaluated exactly at 0 yields inf, so successive
  // refinements can never agree.
  auto f = [](double x) { return 1.0 / std::sqrt(std::fabs(x)); };
  std::vector<double> bp{-1.0, 1.0};
  CHECK_THROWS_AS(integrateAdaptive(f, bp, 8, 1e-12, 0.0, 4), NonConvergence);
}

TEST_CASE("decadeBreakpoints spans decades and caps at hi") {
  auto bp = decadeBreakpoints(100.0);
  std::vector<double> want{0.0, 1.0, 10.0, 100.0};
  CHECK(bp == want);
  auto bp2 = decadeBreakpoints(500.0);
  std::vector<double> want2{0.0, 1.0, 10.0, 100.0, 500.0};
  CHECK(bp2 == want2);
  auto bp3 = decadeBreakpoints(0.5);
  CHECK(bp3.front() == 0.0);
  CHECK(bp3.back() == 0.5);
}

TEST_CASE("quadrature spec validation rejects bad panel counts and domains") {
  QuadratureSpec ok;
  CHECK_NOTHROW(validate(ok));
  QuadratureSpec bad = ok;
  bad.panels = 0;
  CHECK_THROWS_AS(validate(bad), ValidationError);
  QuadratureSpec badDomain = ok;
  badDomain.domain = {5.0, -5.0};
  CHECK_THROWS_AS(validate(badDomain), ValidationError);
}

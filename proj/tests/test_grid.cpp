#include "nls/grid.hpp"

#include <cmath>

#include "doctest.h"

using namespace nls;

TEST_CASE("grid construction validates and rejects singular loci") {
  CHECK_THROWS_AS(GridSpec::make(1, 0, 11, 0, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec::make(0, 1, 2, 0, 1, 3), std::invalid_argument);
  const double sing[] = {0.0};
  CHECK_THROWS_AS(GridSpec::make(-1, 1, 11, 0, 1, 3, sing), std::invalid_argument);
  CHECK_NOTHROW(GridSpec::make(0.5, 3, 11, 0, 1, 3, sing));
  CHECK_THROWS_AS(GridSpec::make(0.5, 3, 11, -0.5, 1, 3, {}, sing), std::invalid_argument);
}

TEST_CASE("cumint of a constant integrand is exact") {
  const auto g = GridSpec::make(0, 1, 101, 0, 0, 1);
  RealField s(g);
  for (auto& v : s.data) v = 1.0;
  const auto F = cumint_x(s, 0.0);
  CHECK(std::fabs(F.at(g.n_x - 1, 0) - 1.0) <= 1e-12);
  CHECK(F.at(0, 0) == 0.0);
}

TEST_CASE("cumint matches the closed form for 2n/x on [1, e]") {
  const auto g = GridSpec::make(1.0, std::exp(1.0), 201, 0, 0, 1);
  RealField s(g);
  for (int i = 0; i < g.n_x; ++i) s.at(i, 0) = 2.0 / g.x(i);
  const auto F = cumint_x(s, 1.0);
  CHECK(std::fabs(F.at(g.n_x - 1, 0) - 2.0) <= 1e-8);
  // every point, not just the right end
  double worst = 0;
  for (int i = 0; i < g.n_x; ++i)
    worst = std::max(worst, std::fabs(F.at(i, 0) - 2.0 * std::log(g.x(i))));
  CHECK(worst <= 1e-8);
}

TEST_CASE("d/dx of cumint recovers the integrand at second order") {
  auto err_at = [](int n) {
    const auto g = GridSpec::make(0, 2, n, 0, 0, 1);
    RealField s(g);
    for (int i = 0; i < g.n_x; ++i) s.at(i, 0) = std::sin(2.0 * g.x(i));
    const auto dF = fd_x(cumint_x(s));
    double worst = 0;
    for (int i = 0; i < g.n_x; ++i) worst = std::max(worst, std::fabs(dF.at(i, 0) - s.at(i, 0)));
    return worst;
  };
  const double e1 = err_at(101);
  const double e2 = err_at(201);
  CHECK(e2 <= e1 / 3.0);  // observed order about 2
}

TEST_CASE("cumint is linear") {
  const auto g = GridSpec::make(0, 3, 157, 0, 0, 1);
  RealField u(g), w(g);
  for (int i = 0; i < g.n_x; ++i) {
    u.at(i, 0) = std::sin(g.x(i));
    w.at(i, 0) = std::exp(-g.x(i));
  }
  const double a = 2.25, b = -0.7;
  RealField mix(g);
  for (int i = 0; i < g.n_x; ++i) mix.at(i, 0) = a * u.at(i, 0) + b * w.at(i, 0);
  const auto Fmix = cumint_x(mix);
  const auto Fu = cumint_x(u);
  const auto Fw = cumint_x(w);
  double worst = 0;
  for (int i = 0; i < g.n_x; ++i)
    worst = std::max(worst,
                     std::fabs(Fmix.at(i, 0) - (a * Fu.at(i, 0) + b * Fw.at(i, 0))));
  CHECK(worst <= 1e-12);
}

TEST_CASE("cumint rejects a mismatched base point and short rows") {
  const auto g = GridSpec::make(0, 1, 11, 0, 0, 1);
  RealField s(g);
  CHECK_THROWS_AS(cumint_x(s, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(cumint_row(std::vector<double>{1.0, 2.0}, 0.1), std::invalid_argument);
}

TEST_CASE("eval_on_grid reports the failing location") {
  const auto g = GridSpec::make(-1, 1, 5, 0, 0, 1);
  CHECK_THROWS_WITH_AS(eval_on_grid(parse_expr("log(x)"), g), doctest::Contains("at (x ="),
                       EvalError);
}

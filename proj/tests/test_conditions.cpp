#include "nls/conditions.hpp"

#include <cmath>
#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace nls;

namespace {

GridSpec small_grid(double x0 = -2, double x1 = 2) {
  return GridSpec::make(x0, x1, 41, 0.0, 1.0, 11);
}

}  // namespace

TEST_CASE("residual_fg on the known families") {
  // homogeneous case
  CoefficientSet c;
  auto r = residual_fg(c, Expr::constant(1.0), small_grid());
  CHECK(r.report.max_abs == 0.0);
  CHECK(r.report.pass);

  // power-law case: f = x^(-2n), g = x^n, c1 = 1
  CoefficientSet pw;
  pw.f = parse_expr("x^(-2*n)");
  pw.g = parse_expr("x^n");
  pw.params = {{"n", 1.0}};
  auto r2 = residual_fg(pw, Expr::constant(1.0), GridSpec::make(0.5, 3, 41, 0, 1, 5));
  CHECK(r2.report.max_abs <= 1e-13);

  // deliberate mismatch
  CoefficientSet bad;
  bad.f = Expr::constant(2.0);
  auto r3 = residual_fg(bad, Expr::constant(1.0), small_grid());
  CHECK(r3.report.max_abs == doctest::Approx(1.0));
  CHECK_FALSE(r3.report.pass);

  // c1 must be t-only
  CHECK_THROWS_AS(residual_fg(c, Expr::x(), small_grid()), std::invalid_argument);
}

TEST_CASE("residual_gamma on the known families") {
  CoefficientSet c;
  c.gamma = parse_expr("-alpha/2");
  c.params = {{"alpha", 0.4}};
  auto r = residual_gamma(c, parse_expr("exp(alpha*t)"), small_grid());
  CHECK(r.report.max_abs <= 1e-14);

  CoefficientSet grow;
  grow.g = parse_expr("exp(alpha*t)");
  grow.params = {{"alpha", 0.7}};
  auto r2 = residual_gamma(grow, parse_expr("exp(2*alpha*t)"), small_grid());
  CHECK(r2.report.max_abs <= 1e-13);

  CoefficientSet triv;
  auto r3 = residual_gamma(triv, Expr::constant(1.0), small_grid());
  CHECK(r3.report.max_abs == 0.0);
}

TEST_CASE("residual_v on the known families") {
  // constant/linear potential with constant coefficients
  CoefficientSet c;
  c.v = parse_expr("0.37 + 1.4*x");
  auto r = residual_v(c, small_grid());
  CHECK(r.report.max_abs <= 1e-12);

  // expulsive harmonic potential with gain/loss
  CoefficientSet h;
  h.gamma = parse_expr("-alpha/2");
  h.v = parse_expr("alpha^2*x^2/4");
  h.params = {{"alpha", 0.6}};
  auto r2 = residual_v(h, small_grid());
  CHECK(r2.report.max_abs <= 1e-12);

  // v = x^2 on the homogeneous background leaves exactly 2*(g v_xx) = 4
  CoefficientSet q;
  q.v = parse_expr("x^2");
  auto r3 = residual_v(q, small_grid());
  CHECK(r3.report.max_abs == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_FALSE(r3.report.pass);
}

TEST_CASE("residual_v accepts the power-law scenario") {
  CoefficientSet c;
  c.f = parse_expr("x^(-2*n)");
  c.g = parse_expr("x^n");
  c.v = parse_expr("-(1/4)*n*(n+2)*x^(-2*(n+1))");
  for (double n : {1.0, 2.0, 3.0}) {
    c.params = {{"n", n}};
    auto r = residual_v(c, GridSpec::make(0.5, 3, 81, 0, 1, 5));
    CAPTURE(n);
    CHECK(r.report.pass);
    CHECK(r.report.max_abs <= 1e-8 * std::max(1.0, r.report.normalization));
  }
}

TEST_CASE("residual_painleve matches hand algebra") {
  const auto g = GridSpec::make(-1, 1, 11, 0, 2, 21);
  auto r = residual_painleve(Expr::constant(1.0), Expr::constant(1.0), Expr::constant(0.0), {}, g);
  CHECK(r.report.max_abs == 0.0);

  const double alpha = 0.8;
  const Params p{{"alpha", alpha}};
  auto r2 = residual_painleve(Expr::constant(1.0), parse_expr("exp(alpha*t)"),
                              parse_expr("alpha^2/4"), p, g);
  CHECK(r2.report.max_abs <= 1e-10 * r2.report.normalization);

  // v2 = 0 leaves -alpha^2 e^{2 alpha t} pointwise
  auto r3 = residual_painleve(Expr::constant(1.0), parse_expr("exp(alpha*t)"),
                              Expr::constant(0.0), p, g);
  REQUIRE(r3.values.size() == static_cast<std::size_t>(g.n_t));
  for (int j = 0; j < g.n_t; ++j) {
    const double expect = -alpha * alpha * std::exp(2 * alpha * g.t(j));
    CHECK(r3.values[j] == doctest::Approx(expect).epsilon(1e-12));
  }

  CHECK_THROWS_AS(
      residual_painleve(parse_expr("x"), Expr::constant(1.0), Expr::constant(0.0), {}, g),
      std::invalid_argument);
}

TEST_CASE("compute_H closed forms") {
  // h = 0 gives H identically 1
  CoefficientSet c;
  c.h = Expr::constant(0.0);
  auto hg = compute_H(c, small_grid());
  for (double v : hg.H.data) CHECK(v == 1.0);

  // f = 1, h = n/x on [1,3] gives H = x^(2n) (base point 1)
  CoefficientSet pl;
  pl.h = parse_expr("n/x");
  pl.params = {{"n", 1.0}};
  const auto grid = GridSpec::make(1, 3, 201, 0, 1, 3);
  auto hg2 = compute_H(pl, grid);
  double worst = 0;
  for (int i = 0; i < grid.n_x; ++i)
    worst = std::max(worst, std::fabs(hg2.H.at(i, 0) - grid.x(i) * grid.x(i)));
  CHECK(worst <= 1e-8);

  // f = x^(q-2p), h = (q/2) x^(q-2p-1) gives H proportional to x^q
  CoefficientSet pq;
  pq.f = parse_expr("x^(q - 2*p)");
  pq.h = parse_expr("(q/2)*x^(q - 2*p - 1)");
  pq.params = {{"p", 1.0}, {"q", 4.0}};
  const auto grid2 = GridSpec::make(0.5, 3, 801, 0, 1, 3);
  auto hg3 = compute_H(pq, grid2);
  const double scale = std::pow(0.5, 4.0);  // normalization at x_min
  double worst2 = 0;
  for (int i = 0; i < grid2.n_x; ++i) {
    const double expect = std::pow(grid2.x(i), 4.0) / scale;
    worst2 = std::max(worst2, std::fabs(hg3.H.at(i, 0) - expect) / expect);
  }
  CHECK(worst2 <= 1e-8);

  CHECK_THROWS_AS(compute_H(CoefficientSet{}, small_grid()), std::invalid_argument);
}

TEST_CASE("residual_v_hd reduces to 4x residual_v when h = 0") {
  testing::ExprGen gen(400100);
  for (int trial = 0; trial < 8; ++trial) {
    CoefficientSet c;
    c.f = Expr::call(Builtin::Exp, {Expr::constant(0.2) * gen.gen(2)});
    c.g = Expr::call(Builtin::Exp, {Expr::constant(0.2) * gen.gen(2)});
    c.gamma = Expr::constant(0.3) * gen.gen(2);
    c.v = gen.gen(2);
    const auto grid = GridSpec::make(-1, 1, 21, 0, 1, 5);
    auto rv = residual_v(c, grid);
    auto rhd = residual_v_hd(c, grid);
    REQUIRE(rv.values.size() == rhd.values.size());
    const double scale = std::max(1.0, rhd.report.normalization);
    for (std::size_t k = 0; k < rv.values.size(); ++k)
      CHECK(std::fabs(rhd.values[k] - 4.0 * rv.values[k]) <= 1e-10 * scale);
  }
}

TEST_CASE("residual_v_hd accepts the constant-effective-mass scenario") {
  for (double n : {1.0, 2.0, 3.0}) {
    CoefficientSet c;
    c.g = parse_expr("x^n");
    c.h = parse_expr("n/x");
    c.v = parse_expr("n*(n-2)/(4*x^2)");
    c.params = {{"n", n}};
    const auto grid = GridSpec::make(1, 3, 201, 0, 1, 5);
    auto r = residual_v_hd(c, grid);
    CAPTURE(n);
    CHECK(r.report.max_abs <= 1e-7 * std::max(1.0, r.report.normalization));
    CHECK(r.report.pass == (r.report.max_abs <= r.report.tolerance * std::max(1.0, r.report.normalization)));
  }
}

TEST_CASE("residual_v_hd rejects a sign-flipped potential") {
  for (double n : {1.0, 3.0}) {
    CoefficientSet c;
    c.g = parse_expr("x^n");
    c.h = parse_expr("n/x");
    c.v = parse_expr("-n*(n-2)/(4*x^2)");
    c.params = {{"n", n}};
    auto r = residual_v_hd(c, GridSpec::make(1, 3, 101, 0, 1, 3));
    CAPTURE(n);
    CHECK_FALSE(r.report.pass);
    CHECK(r.report.max_abs > r.report.tolerance * std::max(1.0, r.report.normalization));
  }
}

TEST_CASE("residual_gamma tracks a time-dependent drift weight") {
  // f = 1, h = c(t)/x gives H = (x/x_min)^(2 c(t)), so the gamma relation
  // picks up -H_t/(4H) = -(1/2) c'(t) log(x/x_min), an x-dependent gamma.
  CoefficientSet c;
  c.h = parse_expr("0.3*t/x");
  c.gamma = parse_expr("-0.15*log(x/xm)");
  c.params = {{"xm", 1.0}};
  const auto grid = GridSpec::make(1, 3, 401, 0, 1, 21);
  auto r = residual_gamma(c, Expr::constant(1.0), grid);
  CHECK(r.report.condition == "gamma-hd");
  CHECK(r.report.max_abs <= 1e-8 * std::max(1.0, r.report.normalization));
  CHECK(r.report.pass);

  // and a wrong sign is caught
  CoefficientSet bad = c;
  bad.gamma = parse_expr("0.15*log(x/xm)");
  auto rb = residual_gamma(bad, Expr::constant(1.0), grid);
  CHECK_FALSE(rb.report.pass);
}

TEST_CASE("time-only specialization agrees with the Painleve condition") {
  const double alpha = 0.5;
  const Params p{{"alpha", alpha}};
  const auto grid = GridSpec::make(-2, 2, 21, 0, 1.5, 16);
  for (double eps : {0.0, 0.1}) {
    CoefficientSet c;
    c.g = parse_expr("exp(alpha*t)");
    c.params = p;
    const Expr v2 = parse_expr("alpha^2/4") + Expr::constant(eps);
    c.v = v2 * Expr::x() * Expr::x();
    auto rv = residual_v(c, grid);
    auto rp = residual_painleve(c.f, c.g, v2, p, grid);
    const bool v_zero = rv.report.max_abs <= 1e-10 * std::max(1.0, rv.report.normalization);
    const bool p_zero = rp.report.max_abs <= 1e-10 * std::max(1.0, rp.report.normalization);
    CHECK(v_zero == (eps == 0.0));
    CHECK(v_zero == p_zero);
  }
}

TEST_CASE("scaling g -> l g, f -> f / l^2 preserves the fg pass flag") {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> lam(0.3, 3.0);
  for (int i = 0; i < 10; ++i) {
    const double l = lam(rng);
    CoefficientSet c;
    c.f = parse_expr("exp(0.3*t)/x^2");
    c.g = parse_expr("x*exp(0.1*t)");
    const Expr c1 = parse_expr("exp(0.5*t)");
    const auto grid = GridSpec::make(0.5, 2, 31, 0, 1, 5);
    auto base = residual_fg(c, c1, grid);
    CoefficientSet s;
    s.f = c.f / Expr::constant(l * l);
    s.g = Expr::constant(l) * c.g;
    auto scaled = residual_fg(s, c1, grid);
    CHECK(base.report.pass == scaled.report.pass);
  }
}

TEST_CASE("reports are deterministic") {
  CoefficientSet c;
  c.f = parse_expr("x^(-2)");
  c.g = parse_expr("x");
  c.v = parse_expr("-(3/4)*x^(-4)");
  const auto grid = GridSpec::make(0.5, 3, 101, 0, 1, 7);
  auto a = residual_v(c, grid);
  auto b = residual_v(c, grid);
  CHECK(a.values == b.values);
  CHECK(a.report.max_abs == b.report.max_abs);
  CHECK(a.report.rms == b.report.rms);
  CHECK(a.report.normalization == b.report.normalization);
}

TEST_CASE("quadratic potential decomposition") {
  auto q = decompose_quadratic_potential(parse_expr("exp(t) + 2*t*x + 0.25*x^2"));
  REQUIRE(q.has_value());
  CHECK(q->v2.eval(0, 1) == doctest::Approx(0.25));
  CHECK(q->v1.eval(0, 2) == doctest::Approx(4.0));
  CHECK(q->v0.eval(0, 1) == doctest::Approx(std::exp(1.0)));
  CHECK_FALSE(decompose_quadratic_potential(parse_expr("x^3")).has_value());
  CHECK_FALSE(decompose_quadratic_potential(parse_expr("1/x")).has_value());
}

#include "nls/simulator.hpp"

#include <cmath>

#include "doctest.h"

using namespace nls;

namespace {

// sqrt(2) sech(x) e^{it} on the homogeneous equation
CandidateSolution soliton() {
  return {parse_expr("sqrt(2)*sech(x)*cos(t)"), parse_expr("sqrt(2)*sech(x)*sin(t)")};
}

CoefficientSet eq19_coeffs() {
  CoefficientSet c;
  c.g = parse_expr("t^2*x^3");
  c.v = parse_expr("3*x^2/(16*t^2) - 3/(4*x^2)");
  return c;
}

CandidateSolution eq19_solution() {
  return {parse_expr("cos(x^2/(8*t))*sn(t*x^2/sqrt(8), -1)/sqrt(x)"),
          parse_expr("-sin(x^2/(8*t))*sn(t*x^2/sqrt(8), -1)/sqrt(x)")};
}

}  // namespace

TEST_CASE("residual_of_candidate") {
  const auto grid = GridSpec::make(-10, 10, 101, 0, 1, 7);
  CoefficientSet c;  // homogeneous

  auto zero = residual_of_candidate(c, CandidateSolution{}, grid);
  CHECK(zero.report.max_abs == 0.0);

  auto sol = residual_of_candidate(c, soliton(), grid);
  CHECK(sol.report.max_abs <= 1e-9);
  CHECK(sol.report.pass);

  auto r19 = residual_of_candidate(eq19_coeffs(), eq19_solution(),
                                   GridSpec::make(0.7, 3, 300, 0.5, 2, 150));
  CHECK(r19.report.max_abs <= 1e-6);
  CHECK(r19.report.pass);

  // a non-solution is reported loudly
  CoefficientSet pert = c;
  pert.v = Expr::constant(0.5);
  auto bad = residual_of_candidate(pert, soliton(), grid);
  CHECK_FALSE(bad.report.pass);
  CHECK(bad.report.max_abs > 0.1);
}

TEST_CASE("soliton propagation meets the accuracy targets") {
  const auto grid = GridSpec::make(-20, 20, 1024, 0, 0, 1);
  CoefficientSet c;
  SolverConfig cfg;
  cfg.dt = 1e-3;
  const auto psi0 = sample_candidate(soliton(), c, grid, 0.0);
  const auto run = propagate(c, psi0, grid, 1.0, cfg);
  const GridSpec& og = run.psi.grid;
  REQUIRE(og.n_t == 1001);

  const auto ref = sample_candidate(soliton(), c, grid, 1.0);
  std::vector<std::complex<double>> last(og.n_x);
  for (int i = 0; i < og.n_x; ++i) last[i] = run.psi.at(i, og.n_t - 1);
  CHECK(linf_diff(last, ref) <= 1e-3);

  // gamma = 0, real coefficients: discrete norm is conserved
  const double n0 = l2_norm(psi0, grid.dx());
  const double nT = l2_norm(last, grid.dx());
  CHECK(std::fabs(nT - n0) / n0 <= 1e-8);
}

TEST_CASE("constant gain/loss drives the norm as exp(-gamma t)") {
  // i Psi_t + i gamma Psi + ... = 0 forces d||Psi||^2/dt = -2 gamma ||Psi||^2;
  // with gamma = -alpha/2 < 0 the norm grows like e^{alpha t / 2}.
  const double alpha = 0.2;
  CoefficientSet c;
  c.gamma = Expr::constant(-alpha / 2.0);
  c.v = parse_expr("alpha^2*x^2/4");
  c.params = {{"alpha", alpha}};
  const auto grid = GridSpec::make(-16, 16, 512, 0, 0, 1);
  CandidateSolution gauss{parse_expr("exp(-(x^2)/2)"), Expr::constant(0.0)};
  const auto psi0 = sample_candidate(gauss, c, grid, 0.0);
  SolverConfig cfg;
  cfg.dt = 5e-4;
  const auto run = propagate(c, psi0, grid, 1.0, cfg);
  std::vector<std::complex<double>> last(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) last[i] = run.psi.at(i, run.psi.grid.n_t - 1);
  const double expect = l2_norm(psi0, grid.dx()) * std::exp(alpha / 2.0);
  CHECK(std::fabs(l2_norm(last, grid.dx()) - expect) / expect <= 1e-6);
}

TEST_CASE("time-dependent gain/loss follows the integrated mass balance") {
  // gamma = 0.1 sin t: ||Psi(T)|| = ||Psi(0)|| exp(-0.1 (1 - cos T)).
  CoefficientSet c;
  c.gamma = parse_expr("0.1*sin(t)");
  const auto grid = GridSpec::make(-16, 16, 512, 0, 0, 1);
  CandidateSolution gauss{parse_expr("exp(-(x^2)/2)"), Expr::constant(0.0)};
  const auto psi0 = sample_candidate(gauss, c, grid, 0.0);
  SolverConfig cfg;
  cfg.dt = 5e-4;
  const double T = 1.0;
  const auto run = propagate(c, psi0, grid, T, cfg);
  std::vector<std::complex<double>> last(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) last[i] = run.psi.at(i, run.psi.grid.n_t - 1);
  const double expect =
      l2_norm(psi0, grid.dx()) * std::exp(-0.1 * (1.0 - std::cos(T)));
  CHECK(std::fabs(l2_norm(last, grid.dx()) - expect) / expect <= 1e-6);
}

TEST_CASE("time reversal returns the initial data") {
  // Real time-independent coefficients: conjugating and propagating forward
  // again undoes the evolution.
  const auto grid = GridSpec::make(-20, 20, 512, 0, 0, 1);
  CoefficientSet c;
  SolverConfig cfg;
  cfg.dt = 2e-3;
  const double T = 0.5;
  const auto psi0 = sample_candidate(soliton(), c, grid, 0.0);
  const auto fwd = propagate(c, psi0, grid, T, cfg);
  std::vector<std::complex<double>> mid(grid.n_x), back0(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) mid[i] = std::conj(fwd.psi.at(i, fwd.psi.grid.n_t - 1));
  const auto bwd = propagate(c, mid, grid, T, cfg);
  for (int i = 0; i < grid.n_x; ++i)
    back0[i] = std::conj(bwd.psi.at(i, bwd.psi.grid.n_t - 1));

  const auto ref = sample_candidate(soliton(), c, grid, T);
  std::vector<std::complex<double>> lastf(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) lastf[i] = fwd.psi.at(i, fwd.psi.grid.n_t - 1);
  const double fwd_err = linf_diff(lastf, ref);
  const double rt_err = linf_diff(back0, psi0);
  CHECK(rt_err <= 10.0 * fwd_err);
}

TEST_CASE("propagating the eq19 solution tracks it") {
  const auto grid = GridSpec::make(0.7, 3, 2048, 0.5, 0.5, 1);
  const auto c = eq19_coeffs();
  const auto ref = eq19_solution();
  const auto psi0 = sample_candidate(ref, c, grid, 0.5);
  SolverConfig cfg;
  cfg.dt = 2.5e-4;
  cfg.boundary = SolverConfig::Boundary::AnalyticDirichlet;
  const auto run = propagate(c, psi0, grid, 0.5, cfg, ref);
  const auto expect = sample_candidate(ref, c, grid, 1.0);
  std::vector<std::complex<double>> last(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) last[i] = run.psi.at(i, run.psi.grid.n_t - 1);
  CHECK(linf_diff(last, expect) <= 1e-2);
}

TEST_CASE("convergence study observes second order") {
  const auto grid = GridSpec::make(-20, 20, 257, 0, 0, 1);
  CoefficientSet c;
  SolverConfig cfg;
  cfg.dt = 4e-3;
  const auto rows = convergence_study(c, soliton(), grid, 1.0, cfg, 3);
  REQUIRE(rows.size() == 3);
  CHECK(std::isnan(rows[0].observed_order));
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CAPTURE(k);
    CHECK(rows[k].observed_order >= 1.8);
    CHECK(rows[k].observed_order <= 2.2);
    CHECK_FALSE(rows[k].anomaly);
  }
  CHECK_THROWS_AS(convergence_study(c, soliton(), grid, 1.0, cfg, 1), std::invalid_argument);

  // minimal table shape
  SolverConfig quick;
  quick.dt = 5e-3;
  const auto two = convergence_study(c, soliton(), GridSpec::make(-20, 20, 65, 0, 0, 1), 0.1,
                                     quick, 2);
  CHECK(two.size() == 2);
}

TEST_CASE("drift-term propagation self-converges at second order") {
  // No closed-form solution for the radial-drift family, so refine against
  // the next level; the ratio of successive differences shows the order.
  CoefficientSet c;
  c.g = parse_expr("x^2");
  c.h = parse_expr("2/x");
  c.v = Expr::constant(0.0);
  const CandidateSolution bump{parse_expr("exp(-16*(x-2)^2)"), Expr::constant(0.0)};
  const double T = 0.1;
  auto final_level = [&](int level) {
    const int nx = ((129 - 1) << level) + 1;
    const auto grid = GridSpec::make(1, 3, nx, 0, 0, 1);
    SolverConfig cfg;
    cfg.dt = 2e-3 / (1 << level);
    const auto psi0 = sample_candidate(bump, c, grid, 0.0);
    const auto run = propagate(c, psi0, grid, T, cfg);
    std::vector<std::complex<double>> last(grid.n_x);
    for (int i = 0; i < grid.n_x; ++i) last[i] = run.psi.at(i, run.psi.grid.n_t - 1);
    return last;
  };
  const auto l0 = final_level(0);
  const auto l1 = final_level(1);
  const auto l2 = final_level(2);
  // compare on the coarse nodes (every 2^k-th fine node)
  auto diff_on_coarse = [](const std::vector<std::complex<double>>& coarse,
                           const std::vector<std::complex<double>>& fine, int stride) {
    double m = 0;
    for (std::size_t i = 0; i < coarse.size(); ++i)
      m = std::max(m, std::abs(coarse[i] - fine[i * stride]));
    return m;
  };
  const double e0 = diff_on_coarse(l0, l1, 2);
  const double e1 = diff_on_coarse(l1, l2, 2);
  CHECK(e1 <= e0 / 3.0);  // about 4x for a second-order scheme
}

TEST_CASE("candidate residual agrees with an independent finite-difference route") {
  CoefficientSet c;
  c.f = parse_expr("1 + 0.2*sin(x)");
  c.h = parse_expr("0.3*cos(x)*exp(-t/2)");
  c.g = parse_expr("exp(t/4)");
  c.gamma = parse_expr("0.1*x");
  c.v = parse_expr("0.5*x^2 - t");
  const CandidateSolution psi{parse_expr("exp(-(x^2)/3)*cos(t + x)"),
                              parse_expr("0.5*sech(x)*sin(2*t)")};

  auto fd_gap = [&](int nx, int nt) {
    const auto grid = GridSpec::make(-2, 2, nx, 0, 1, nt);
    const auto sym = residual_of_candidate(c, psi, grid);
    const RealField Pr = eval_on_grid(psi.re, grid, c.params);
    const RealField Pi = eval_on_grid(psi.im, grid, c.params);
    const RealField Prx = fd_x(Pr), Pix = fd_x(Pi);
    const RealField Prxx = fd_xx(Pr), Pixx = fd_xx(Pi);
    const RealField Prt = fd_t(Pr), Pit = fd_t(Pi);
    const RealField F = eval_on_grid(c.f, grid, c.params);
    const RealField Hd = eval_on_grid(*c.h, grid, c.params);
    const RealField G = eval_on_grid(c.g, grid, c.params);
    const RealField V = eval_on_grid(c.v, grid, c.params);
    const RealField Gam = eval_on_grid(c.gamma, grid, c.params);
    double gap = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double re = Pr.data[k], im = Pi.data[k];
      const double amp2 = re * re + im * im;
      const double rre = F.data[k] * Prxx.data[k] + Hd.data[k] * Prx.data[k] +
                         G.data[k] * amp2 * re + V.data[k] * re - Gam.data[k] * im -
                         Pit.data[k];
      const double rim = F.data[k] * Pixx.data[k] + Hd.data[k] * Pix.data[k] +
                         G.data[k] * amp2 * im + V.data[k] * im + Gam.data[k] * re +
                         Prt.data[k];
      gap = std::max(gap, std::fabs(std::hypot(rre, rim) - sym.values[k]));
    }
    return gap;
  };
  const double g1 = fd_gap(101, 41);
  const double g2 = fd_gap(201, 81);
  CHECK(g2 <= g1 / 3.0);  // the two routes converge to each other at order 2
}

TEST_CASE("anomaly flag marks error growth under refinement") {
  const double errs[] = {1e-3, 2.5e-4, 8e-13, 2.5e-12, 2.4e-12};
  const auto flags = flag_anomalies(errs);
  CHECK(flags == std::vector<bool>{false, false, false, true, false});
}

TEST_CASE("fixed-point divergence is an explicit error") {
  const auto grid = GridSpec::make(-10, 10, 128, 0, 0, 1);
  CoefficientSet c;
  SolverConfig cfg;
  cfg.dt = 0.1;
  cfg.max_fixpoint_iters = 2;
  const auto psi0 = sample_candidate(soliton(), c, grid, 0.0);
  CHECK_THROWS_AS(propagate(c, psi0, grid, 0.3, cfg), FixpointDivergence);
}

TEST_CASE("propagate validates its inputs") {
  const auto grid = GridSpec::make(-1, 1, 64, 0, 0, 1);
  CoefficientSet c;
  std::vector<std::complex<double>> psi0(grid.n_x, {0, 0});
  SolverConfig cfg;
  cfg.boundary = SolverConfig::Boundary::AnalyticDirichlet;
  CHECK_THROWS_AS(propagate(c, psi0, grid, 1.0, cfg), std::invalid_argument);
  SolverConfig bad;
  bad.dt = -1;
  CHECK_THROWS_AS(propagate(c, psi0, grid, 1.0, bad), std::invalid_argument);
}

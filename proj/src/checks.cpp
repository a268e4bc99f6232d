#include "nls/checks.hpp"

#include <cmath>

namespace nls {

namespace {

ResidualResult finish(std::string condition, const GridSpec& grid, std::vector<double> r,
                      double norm, double tol) {
  ResidualResult out;
  out.report.condition = std::move(condition);
  out.report.grid = grid;
  out.report.tolerance = tol;
  out.report.normalization = norm;
  double mx = 0, s2 = 0;
  for (double v : r) {
    mx = std::max(mx, std::fabs(v));
    s2 += v * v;
  }
  out.report.max_abs = mx;
  out.report.rms = r.empty() ? 0.0 : std::sqrt(s2 / r.size());
  out.report.pass = mx <= tol * std::max(1.0, norm);
  out.values = std::move(r);
  return out;
}

}  // namespace

std::vector<ResidualResult> gauge_consistency(const Scenario& s, double tol) {
  if (!s.gauge) throw std::invalid_argument("gauge_consistency: scenario has no gauge");
  GaugeSpec gs = *s.gauge;
  for (const auto& [k, v] : s.params) gs.params[k] = v;
  const GridSpec& grid = s.grid;
  const std::size_t n = grid.size();

  const RealField X = compute_X(gs, grid);
  const RealField Theta = compute_theta(gs, s.coeffs.f, grid);
  const RealField F = eval_on_grid(s.coeffs.f.simplified(), grid, s.params);
  const RealField G = eval_on_grid(s.coeffs.g.simplified(), grid, s.params);
  const RealField E2b = eval_on_grid(
      Expr::call(Builtin::Exp, {Expr::constant(2.0) * gs.beta}).simplified(), grid, gs.params);
  const RealField Em2b = eval_on_grid(
      Expr::call(Builtin::Exp, {Expr::constant(-2.0) * gs.beta}).simplified(), grid,
      gs.params);
  const auto C2 = eval_on_tline(gs.c2.simplified(), grid, gs.params);
  const RealField Bx = eval_on_grid(gs.beta.diff(Var::X), grid, gs.params);
  const RealField Bt = eval_on_grid(gs.beta.diff(Var::T), grid, gs.params);
  const RealField Gam = eval_on_grid(gs.gamma.simplified(), grid, gs.params);

  std::vector<ResidualResult> out;

  // eq11: e^{2 beta} g = delta p defines p
  std::vector<double> P(n);
  for (std::size_t k = 0; k < n; ++k) P[k] = E2b.data[k] * G.data[k] / gs.delta;
  {
    std::vector<double> r(n);
    double norm = 0;
    for (std::size_t k = 0; k < n; ++k) {
      r[k] = E2b.data[k] * G.data[k] - gs.delta * P[k];
      norm = std::max(norm, std::fabs(E2b.data[k] * G.data[k]));
    }
    out.push_back(finish("sim-eq11", grid, std::move(r), norm, tol));
  }

  // eq12: f X_x^2 = eps p with the analytic X_x = c2 e^{-2 beta}
  {
    std::vector<double> r(n);
    double norm = 0;
    for (int j = 0; j < grid.n_t; ++j)
      for (int i = 0; i < grid.n_x; ++i) {
        const std::size_t k = static_cast<std::size_t>(j) * grid.n_x + i;
        const double xx = C2[j] * Em2b.data[k];
        const double lhs = F.data[k] * xx * xx;
        const double rhs = gs.epsilon * P[k];
        r[k] = lhs - rhs;
        norm = std::max({norm, std::fabs(lhs), std::fabs(rhs)});
      }
    out.push_back(finish("sim-eq12", grid, std::move(r), norm, tol));
  }

  const RealField Tx = fd_x(Theta);
  const RealField Xx = fd_x(X);

  // eq14: X_t + 2 f X_x theta_x = 0 (finite differences)
  if (grid.n_t >= 3) {
    const RealField Xt = fd_t(X);
    std::vector<double> r(n);
    double norm = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = Xt.data[k];
      const double b = 2.0 * F.data[k] * Xx.data[k] * Tx.data[k];
      r[k] = a + b;
      norm = std::max({norm, std::fabs(a), std::fabs(b)});
    }
    out.push_back(finish("sim-eq14", grid, std::move(r), norm, tol));
  }

  // eq15: 2 X_x beta_x + X_xx = 0 (finite differences for X)
  {
    const RealField Xxx = fd_xx(X);
    std::vector<double> r(n);
    double norm = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = 2.0 * Xx.data[k] * Bx.data[k];
      const double b = Xxx.data[k];
      r[k] = a + b;
      norm = std::max({norm, std::fabs(a), std::fabs(b)});
    }
    out.push_back(finish("sim-eq15", grid, std::move(r), norm, tol));
  }

  // eq16: beta_t + gamma + f (2 beta_x theta_x + theta_xx) = 0
  {
    const RealField Txx = fd_xx(Theta);
    std::vector<double> r(n);
    double norm = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const double a = Bt.data[k];
      const double b = Gam.data[k];
      const double c = F.data[k] * (2.0 * Bx.data[k] * Tx.data[k] + Txx.data[k]);
      r[k] = a + b + c;
      norm = std::max({norm, std::fabs(a), std::fabs(b), std::fabs(c)});
    }
    out.push_back(finish("sim-eq16", grid, std::move(r), norm, tol));
  }
  return out;
}

std::vector<ResidualResult> scenario_check(const Scenario& s, double tol) {
  std::vector<ResidualResult> out;
  CoefficientSet c = s.coeffs;
  c.params = s.params;

  if (s.gauge) {
    out = gauge_consistency(s, tol);
  } else {
    out.push_back(residual_fg(c, s.free_fns.c1, s.grid, tol));
    out.push_back(residual_gamma(c, s.free_fns.c2, s.grid, tol));
    if (s.v_built) {
      if (c.h)
        throw std::invalid_argument(
            "scenario_check: quadrature-built v with a drift term is unsupported");
      out.push_back(residual_v(c, *s.v_built, s.grid, std::max(tol, kQuadratureTol)));
    } else if (c.h) {
      out.push_back(residual_v_hd(c, s.grid, tol));
    } else {
      out.push_back(residual_v(c, s.grid, tol));
    }

    // Time-only quadratic condition; stated for gamma identically zero.
    const bool t_only = !c.f.simplified().depends_on(Var::X) &&
                        !c.g.simplified().depends_on(Var::X) &&
                        !c.gamma.simplified().depends_on(Var::X);
    const auto gamma0 = c.gamma.simplified().constant_value();
    if (!c.h && !s.v_built && t_only && gamma0 && *gamma0 == 0.0) {
      if (auto quad = decompose_quadratic_potential(c.v))
        out.push_back(residual_painleve(c.f, c.g, quad->v2, s.params, s.grid, tol));
    }
  }

  if (s.psi_ref) {
    const RealField* v_grid = s.v_built ? &s.v_built->v : nullptr;
    const double cand_tol = s.v_built ? std::max(tol, kQuadratureTol) : tol;
    out.push_back(residual_of_candidate(c, *s.psi_ref, s.grid, cand_tol, v_grid));
  }
  return out;
}

}  // namespace nls

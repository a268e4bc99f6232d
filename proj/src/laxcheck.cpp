#include "nls/laxcheck.hpp"

#include <cmath>

namespace nls {

ComplexExpr operator+(const ComplexExpr& a, const ComplexExpr& b) {
  return {a.re + b.re, a.im + b.im};
}

ComplexExpr operator-(const ComplexExpr& a, const ComplexExpr& b) {
  return {a.re - b.re, a.im - b.im};
}

ComplexExpr operator*(const ComplexExpr& a, const ComplexExpr& b) {
  return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

ComplexExpr operator*(const Expr& a, const ComplexExpr& b) { return {a * b.re, a * b.im}; }

ComplexExpr times_i(const ComplexExpr& a) { return {-a.im, a.re}; }

ComplexExpr cdiff(const ComplexExpr& a, Var v) { return {a.re.diff(v), a.im.diff(v)}; }

namespace {

// Modulus residual of a sum of complex terms; normalization tracks the
// largest single term.
ResidualResult complex_residual(const std::string& name,
                                const std::vector<ComplexExpr>& terms, const GridSpec& grid,
                                const Params& params, double tol) {
  std::vector<RealField> tre, tim;
  tre.reserve(terms.size());
  tim.reserve(terms.size());
  for (const auto& t : terms) {
    tre.push_back(eval_on_grid(t.re.simplified(), grid, params));
    tim.push_back(eval_on_grid(t.im.simplified(), grid, params));
  }
  const std::size_t n = grid.size();
  std::vector<double> r(n);
  double norm = 0, mx = 0, s2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double sre = 0, sim = 0;
    for (std::size_t q = 0; q < terms.size(); ++q) {
      const double a = tre[q].data[k], b = tim[q].data[k];
      norm = std::max(norm, std::hypot(a, b));
      sre += a;
      sim += b;
    }
    r[k] = std::hypot(sre, sim);
    mx = std::max(mx, r[k]);
    s2 += r[k] * r[k];
  }
  ResidualResult out;
  out.report.condition = name;
  out.report.grid = grid;
  out.report.tolerance = tol;
  out.report.normalization = norm;
  out.report.max_abs = mx;
  out.report.rms = std::sqrt(s2 / static_cast<double>(n));
  out.report.pass = mx <= tol * std::max(1.0, norm);
  out.values = std::move(r);
  return out;
}

ComplexExpr from_real(const Expr& e) { return {e, Expr::constant(0.0)}; }

}  // namespace

std::vector<ResidualResult> compat_residuals(const LaxFunctions& L, const CoefficientSet& c,
                                             const GridSpec& grid, double tol) {
  Params params = c.params;
  params["lambda"] = L.lambda;

  const Expr f = c.f, g = c.g, gamma = c.gamma, v = c.v;
  const Expr fx = f.diff(Var::X);
  const ComplexExpr d = L.f1 - L.f7;

  const std::vector<ComplexExpr> eq2{cdiff(L.f1, Var::T),
                                     ComplexExpr{} - cdiff(L.g1, Var::X)};
  const std::vector<ComplexExpr> eq8{cdiff(L.f7, Var::T),
                                     ComplexExpr{} - cdiff(L.g13, Var::X)};
  const std::vector<ComplexExpr> eq5{Expr::constant(2.0) * (f * (L.p1 * L.p2)),
                                     from_real(g)};
  const std::vector<ComplexExpr> eq3{fx * L.p1, ComplexExpr{} - (f * (L.p1 * d)),
                                     f * cdiff(L.p1, Var::X), ComplexExpr{} - L.g6};
  const std::vector<ComplexExpr> eq7{fx * L.p2, f * (L.p2 * d), f * cdiff(L.p2, Var::X),
                                     ComplexExpr{} - L.g10};

  // g1 - g13 - i v + gamma  and  g1 - g13 - i v - gamma
  const ComplexExpr core = L.g1 - L.g13 - ComplexExpr{Expr::constant(0.0), v};
  const ComplexExpr with_gamma = core + from_real(gamma);
  const ComplexExpr minus_gamma = core - from_real(gamma);

  const std::vector<ComplexExpr> eq4{L.g6 * d, ComplexExpr{} - times_i(L.p1 * with_gamma),
                                     ComplexExpr{} - cdiff(L.g6, Var::X),
                                     times_i(cdiff(L.p1, Var::T))};
  const std::vector<ComplexExpr> eq6{L.g10 * d, times_i(L.p2 * minus_gamma),
                                     cdiff(L.g10, Var::X), times_i(cdiff(L.p2, Var::T))};
  const std::vector<ComplexExpr> eq1{cdiff(f * (L.p1 * L.p2), Var::X), L.g10 * L.p1,
                                     L.g6 * L.p2};

  std::vector<ResidualResult> out;
  out.push_back(complex_residual("lax-eq2", eq2, grid, params, tol));
  out.push_back(complex_residual("lax-eq8", eq8, grid, params, tol));
  out.push_back(complex_residual("lax-eq5", eq5, grid, params, tol));
  out.push_back(complex_residual("lax-eq3", eq3, grid, params, tol));
  out.push_back(complex_residual("lax-eq7", eq7, grid, params, tol));
  out.push_back(complex_residual("lax-eq4", eq4, grid, params, tol));
  out.push_back(complex_residual("lax-eq6", eq6, grid, params, tol));
  out.push_back(complex_residual("lax-eq1", eq1, grid, params, tol));
  return out;
}

LaxFunctions akns_case1(double lambda) {
  const Expr zero = Expr::constant(0.0);
  const Expr lam = Expr::param("lambda");
  const Expr lam2 = lam * lam;
  LaxFunctions L;
  L.lambda = lambda;
  L.p1 = {Expr::constant(1.0), zero};
  L.p2 = {Expr::constant(-0.5), zero};
  L.f1 = {zero, -lam};
  L.f7 = {zero, lam};
  L.g6 = {zero, Expr::constant(2.0) * lam};   // 2 i lambda p1, p1 = 1
  L.g10 = {zero, lam};                        // -2 i lambda p2, p2 = -1/2
  L.g1 = {zero, Expr::constant(-2.0) * lam2};
  L.g13 = {zero, Expr::constant(2.0) * lam2};
  return L;
}

}  // namespace nls

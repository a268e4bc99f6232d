#include "nls/similarity.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nls {

namespace {

void require_t_only(const Expr& e, const char* what) {
  if (e.simplified().depends_on(Var::X))
    throw std::invalid_argument(std::string(what) + " must depend on t only");
}

void validate(const GaugeSpec& gs) {
  if (gs.epsilon == 0.0 || gs.delta == 0.0)
    throw std::invalid_argument("gauge: epsilon and delta must be nonzero");
  require_t_only(gs.c1, "c1");
  require_t_only(gs.c2, "c2");
  require_t_only(gs.c_theta, "c_theta");
  require_t_only(gs.c_f, "c_f");
}

std::vector<double> c2_line(const GaugeSpec& gs, const GridSpec& grid) {
  auto c2 = eval_on_tline(gs.c2.simplified(), grid, gs.params);
  double mx = 0;
  for (double v : c2) mx = std::max(mx, std::fabs(v));
  for (double v : c2)
    if (std::fabs(v) <= 1e-14 * std::max(1.0, mx))
      throw std::invalid_argument("gauge: c2 vanishes on the t-grid");
  return c2;
}

Expr exp_m2beta(const GaugeSpec& gs) {
  return Expr::call(Builtin::Exp, {Expr::constant(-2.0) * gs.beta}).simplified();
}

}  // namespace

RealField compute_X(const GaugeSpec& gs, const GridSpec& grid) {
  validate(gs);
  const auto c2 = c2_line(gs, grid);
  const auto c1 = eval_on_tline(gs.c1.simplified(), grid, gs.params);
  const RealField I = cumint_x(eval_on_grid(exp_m2beta(gs), grid, gs.params));
  RealField X(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) X.at(i, j) = c1[j] + c2[j] * I.at(i, j);
  return X;
}

RealField compute_X_t(const GaugeSpec& gs, const GridSpec& grid) {
  validate(gs);
  const auto c1t = eval_on_tline(gs.c1.diff(Var::T), grid, gs.params);
  const auto c2t = eval_on_tline(gs.c2.diff(Var::T), grid, gs.params);
  const auto c2 = eval_on_tline(gs.c2.simplified(), grid, gs.params);
  const RealField I = cumint_x(eval_on_grid(exp_m2beta(gs), grid, gs.params));
  const Expr dIdt_integrand =
      (Expr::constant(-2.0) * gs.beta.diff(Var::T) * exp_m2beta(gs)).simplified();
  const RealField J = cumint_x(eval_on_grid(dIdt_integrand, grid, gs.params));
  RealField Xt(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i)
      Xt.at(i, j) = c1t[j] + c2t[j] * I.at(i, j) + c2[j] * J.at(i, j);
  return Xt;
}

Expr compute_g_closed(const GaugeSpec& gs, const Expr& f) {
  return (Expr::constant(gs.delta / gs.epsilon) * pow(gs.c2, Expr::constant(2.0)) *
          Expr::call(Builtin::Exp, {Expr::constant(-6.0) * gs.beta}) * f)
      .simplified();
}

RealField compute_g(const GaugeSpec& gs, const Expr& f, const GridSpec& grid) {
  validate(gs);
  return eval_on_grid(compute_g_closed(gs, f), grid, gs.params);
}

RealField compute_theta(const GaugeSpec& gs, const Expr& f, const GridSpec& grid) {
  validate(gs);
  const RealField Xt = compute_X_t(gs, grid);
  const RealField E2b = eval_on_grid(
      Expr::call(Builtin::Exp, {Expr::constant(2.0) * gs.beta}).simplified(), grid, gs.params);
  const RealField F = eval_on_grid(f.simplified(), grid, gs.params);
  {
    double mx = 0;
    for (double v : F.data) mx = std::max(mx, std::fabs(v));
    for (double v : F.data)
      if (std::fabs(v) <= 1e-14 * std::max(1.0, mx))
        throw std::domain_error("compute_theta: f vanishes on the grid");
  }
  const auto c2 = c2_line(gs, grid);
  const auto cth = eval_on_tline(gs.c_theta.simplified(), grid, gs.params);
  RealField integrand(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i)
      integrand.at(i, j) = E2b.at(i, j) * Xt.at(i, j) / (2.0 * c2[j] * F.at(i, j));
  RealField theta = cumint_x(integrand);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) theta.at(i, j) = -theta.at(i, j) + cth[j];
  return theta;
}

RealField compute_f(const GaugeSpec& gs, const GridSpec& grid) {
  validate(gs);
  const RealField Xt = compute_X_t(gs, grid);
  double mx = 0;
  for (double v : Xt.data) mx = std::max(mx, std::fabs(v));
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i)
      if (std::fabs(Xt.at(i, j)) <= 1e-12 * std::max(1.0, mx)) {
        std::ostringstream os;
        os << "compute_f: singular gauge, X_t vanishes at (x = " << grid.x(i)
           << ", t = " << grid.t(j) << ")";
        throw SingularGaugeError(os.str());
      }

  const Expr k = (gs.c2.diff(Var::T) -
                  Expr::constant(4.0) * gs.c2 * gs.beta.diff(Var::T) -
                  Expr::constant(2.0) * gs.c2 * gs.gamma)
                     .simplified();
  const RealField K = eval_on_grid(k, grid, gs.params);
  const RealField Bx = eval_on_grid(gs.beta.diff(Var::X), grid, gs.params);
  const RealField E2b = eval_on_grid(
      Expr::call(Builtin::Exp, {Expr::constant(2.0) * gs.beta}).simplified(), grid, gs.params);
  const RealField Em2b = eval_on_grid(exp_m2beta(gs), grid, gs.params);

  RealField integrand(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) {
      const double num = Em2b.at(i, j) * (4.0 * E2b.at(i, j) * Bx.at(i, j) * Xt.at(i, j) +
                                          K.at(i, j));
      integrand.at(i, j) = num / Xt.at(i, j);
    }
  const RealField I = cumint_x(integrand);
  const auto cf = eval_on_tline(gs.c_f.simplified(), grid, gs.params);
  RealField f(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) f.at(i, j) = cf[j] * std::exp(I.at(i, j));
  return f;
}

RealField compute_v(const GaugeSpec& gs, const Expr& f, const RealField& theta,
                    const GridSpec& grid) {
  if (grid.n_t < 3)
    throw std::invalid_argument("compute_v: need at least 3 time levels for the stencil");
  const RealField Tt = fd_t(theta);
  const RealField Tx = fd_x(theta);
  const RealField F = eval_on_grid(f.simplified(), grid, gs.params);
  const RealField Bx = eval_on_grid(gs.beta.diff(Var::X), grid, gs.params);
  const RealField Bxx = eval_on_grid(gs.beta.diff(Var::X, 2), grid, gs.params);
  RealField v(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double bx = Bx.data[k], tx = Tx.data[k];
    v.data[k] = Tt.data[k] - F.data[k] * (bx * bx - tx * tx + Bxx.data[k]);
  }
  return v;
}

ComplexField map_solution(const GaugeSpec& gs, const Expr& f, const Expr& q_re,
                          const Expr& q_im, const GridSpec& grid) {
  const RealField X = compute_X(gs, grid);
  const RealField theta = compute_theta(gs, f, grid);
  const RealField B = eval_on_grid(gs.beta.simplified(), grid, gs.params);
  const CompiledExpr qr(q_re.simplified(), gs.params);
  const CompiledExpr qi(q_im.simplified(), gs.params);
  ComplexField psi(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) {
      double qre, qim;
      try {
        qre = qr.eval(X.at(i, j), 0.0);
        qim = qi.eval(X.at(i, j), 0.0);
      } catch (const EvalError& err) {
        std::ostringstream os;
        os << err.what() << " for Q at X = " << X.at(i, j) << " (x = " << grid.x(i)
           << ", t = " << grid.t(j) << ")";
        throw EvalError(os.str());
      }
      const double amp = std::exp(B.at(i, j));
      const double th = theta.at(i, j);
      const std::complex<double> phase(std::cos(th), std::sin(th));
      psi.at(i, j) = amp * phase * std::complex<double>(qre, qim);
    }
  return psi;
}

ResidualResult check_homogeneous(const Expr& q_re, const Expr& q_im, double epsilon,
                                 double delta, double x_lo, double x_hi, int n, double tol) {
  const GridSpec line = GridSpec::make(x_lo, x_hi, n, 0, 0, 1);
  const RealField Qr = eval_on_grid(q_re.simplified(), line);
  const RealField Qi = eval_on_grid(q_im.simplified(), line);
  const RealField Qrxx = eval_on_grid(q_re.diff(Var::X, 2), line);
  const RealField Qixx = eval_on_grid(q_im.diff(Var::X, 2), line);
  std::vector<double> r(line.size());
  double norm = 0;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const double qr = Qr.data[k], qi = Qi.data[k];
    const double amp2 = qr * qr + qi * qi;
    const double re = epsilon * Qrxx.data[k] + delta * amp2 * qr;
    const double im = epsilon * Qixx.data[k] + delta * amp2 * qi;
    norm = std::max({norm, std::hypot(epsilon * Qrxx.data[k], epsilon * Qixx.data[k]),
                     std::fabs(delta) * amp2 * std::hypot(qr, qi)});
    r[k] = std::hypot(re, im);
  }
  ResidualResult out;
  out.report.condition = "homogeneous-q";
  out.report.grid = line;
  out.report.tolerance = tol;
  out.report.normalization = norm;
  double mx = 0, s2 = 0;
  for (double v : r) {
    mx = std::max(mx, v);
    s2 += v * v;
  }
  out.report.max_abs = mx;
  out.report.rms = std::sqrt(s2 / r.size());
  out.report.pass = mx <= tol * std::max(1.0, norm);
  out.values = std::move(r);
  return out;
}

TransformResult similarity_transform(const GaugeSpec& gs, const Expr& f,
                                     const GridSpec& grid) {
  TransformResult out;
  out.X = compute_X(gs, grid);
  for (int j = 0; j < grid.n_t; ++j) {
    const double dir = out.X.at(1, j) - out.X.at(0, j);
    for (int i = 0; i + 1 < grid.n_x; ++i) {
      const double step = out.X.at(i + 1, j) - out.X.at(i, j);
      if (step * dir <= 0.0)
        throw std::domain_error("similarity_transform: X is not strictly monotone in x");
    }
  }
  out.theta = compute_theta(gs, f, grid);
  out.f = eval_on_grid(f.simplified(), grid, gs.params);
  out.g = compute_g(gs, f, grid);
  out.g_closed = compute_g_closed(gs, f);
  out.v = compute_v(gs, f, out.theta, grid);
  const RealField E2b = eval_on_grid(
      Expr::call(Builtin::Exp, {Expr::constant(2.0) * gs.beta}).simplified(), grid, gs.params);
  out.p = ComplexField(grid);
  for (std::size_t k = 0; k < grid.size(); ++k)
    out.p.data[k] = {E2b.data[k] * out.g.data[k] / gs.delta, 0.0};
  return out;
}

GaugeSpec gauge_identity(const GridSpec& grid) {
  GaugeSpec gs;
  gs.c1 = Expr::constant(grid.x_min);  // X = x exactly
  return gs;
}

GaugeSpec gauge_timeonly_beta(double alpha, const GridSpec& grid) {
  // c2 = c8 e^{4 b} with b = (alpha/2) t pins f = c_f; c1 and c_theta absorb
  // the x_min base points so X = e^{alpha t} x and theta = -(alpha/4) x^2.
  GaugeSpec gs;
  gs.params["alpha"] = alpha;
  gs.beta = parse_expr("(alpha/2)*t");
  gs.c2 = parse_expr("exp(2*alpha*t)");
  gs.c1 = parse_expr("xm*exp(alpha*t)");
  gs.c_theta = parse_expr("-(alpha/4)*xm^2");
  gs.params["xm"] = grid.x_min;
  return gs;
}

GaugeSpec gauge_eq19(const GridSpec& grid) {
  // X = -(t/2) x^2 and theta = -x^2/(8t); with f = 1 this produces
  // g = t^2 x^3 and v = 3x^2/(16 t^2) - 3/(4 x^2).
  GaugeSpec gs;
  gs.beta = parse_expr("-(1/2)*log(x)");
  gs.c2 = parse_expr("-t");
  gs.c1 = parse_expr("-(xm^2/2)*t");
  gs.c_theta = parse_expr("-(xm^2)/(8*t)");
  gs.params["xm"] = grid.x_min;
  return gs;
}

Expr q_sn_profile() { return parse_expr("-sn(x/sqrt(2), -1)"); }

}  // namespace nls

#include "nls/constructor.hpp"

#include <cmath>
#include <stdexcept>

namespace nls {

namespace {

Expr sq(const Expr& e) { return pow(e, Expr::constant(2.0)); }

void require_t_only(const Expr& e, const char* what) {
  if (e.simplified().depends_on(Var::X))
    throw std::invalid_argument(std::string(what) + " must depend on t only");
}

void require_nonvanishing(const RealField& f, const char* what) {
  double mx = 0;
  for (double v : f.data) mx = std::max(mx, std::fabs(v));
  for (double v : f.data)
    if (std::fabs(v) <= 1e-14 * std::max(1.0, mx))
      throw std::domain_error(std::string(what) + " vanishes on the grid");
}

}  // namespace

Expr build_f(const Expr& g, const Expr& c1) {
  require_t_only(c1, "c1");
  return (c1 * pow(g, Expr::constant(-2.0))).simplified();
}

Expr build_gamma(const Expr& g, const Expr& c2) {
  require_t_only(c2, "c2");
  return (g.diff(Var::T) / g - c2.diff(Var::T) / (Expr::constant(2.0) * c2)).simplified();
}

Expr v_condition_source(const Expr& f, const Expr& g, const Expr& gamma) {
  const Expr ft = f.diff(Var::T), ftt = f.diff(Var::T, 2);
  const Expr gt = g.diff(Var::T), gtt = g.diff(Var::T, 2);
  const Expr gx = g.diff(Var::X), gxx = g.diff(Var::X, 2);
  const Expr gxxx = g.diff(Var::X, 3), g4 = g.diff(Var::X, 4);
  const Expr gat = gamma.diff(Var::T);
  const Expr two = Expr::constant(2.0);

  const Expr t1 = f * pow(g, Expr::constant(3.0)) * (ft * (gt - two * g * gamma) - ftt * g);
  const Expr t2 = sq(ft) * pow(g, Expr::constant(4.0));
  const Expr t4 = sq(f) * sq(g) *
                  (g * (Expr::constant(4.0) * gt * gamma + gtt) - two * sq(gt) -
                   two * sq(g) * (gat + two * sq(gamma)));
  const Expr t5 = pow(f, Expr::constant(4.0)) *
                  (Expr::constant(36.0) * pow(gx, Expr::constant(4.0)) -
                   Expr::constant(48.0) * g * gxx * sq(gx) +
                   Expr::constant(10.0) * sq(g) * gxxx * gx +
                   sq(g) * (Expr::constant(6.0) * sq(gxx) - g * g4));
  return (t1 + t2 + t4 + t5).simplified();
}

// ---------------------------------------------------------------------------
// Laurent recognition

namespace {

using LTerms = std::vector<LaurentTerm>;

void add_term(LTerms& acc, Expr coeff, double power) {
  for (auto& t : acc)
    if (std::fabs(t.power - power) < 1e-9) {
      t.coeff = (t.coeff + coeff).simplified();
      return;
    }
  acc.push_back({coeff.simplified(), power});
}

std::optional<LTerms> negate(std::optional<LTerms> in) {
  if (!in) return std::nullopt;
  for (auto& t : *in) t.coeff = (-t.coeff).simplified();
  return in;
}

std::optional<LTerms> laurent_rec(const Expr& e, const Params& params) {
  if (!e.depends_on(Var::X)) return LTerms{{e, 0.0}};
  const ExprNode& n = e.node();
  switch (n.kind) {
    case NodeKind::VarX:
      return LTerms{{Expr::constant(1.0), 1.0}};
    case NodeKind::Neg:
      return negate(laurent_rec(Expr(n.args[0]), params));
    case NodeKind::Binary: {
      const Expr a(n.args[0]), b(n.args[1]);
      switch (n.bop) {
        case BinaryOp::Add:
        case BinaryOp::Sub: {
          auto la = laurent_rec(a, params);
          auto lb = (n.bop == BinaryOp::Sub) ? negate(laurent_rec(b, params))
                                             : laurent_rec(b, params);
          if (!la || !lb) return std::nullopt;
          for (auto& t : *lb) add_term(*la, t.coeff, t.power);
          return la;
        }
        case BinaryOp::Mul: {
          auto la = laurent_rec(a, params);
          auto lb = laurent_rec(b, params);
          if (!la || !lb) return std::nullopt;
          if (la->size() * lb->size() > 64) return std::nullopt;
          LTerms out;
          for (const auto& ta : *la)
            for (const auto& tb : *lb)
              add_term(out, ta.coeff * tb.coeff, ta.power + tb.power);
          return out;
        }
        case BinaryOp::Div: {
          auto la = laurent_rec(a, params);
          auto lb = laurent_rec(b, params);
          if (!la || !lb || lb->size() != 1) return std::nullopt;
          LTerms out;
          for (const auto& ta : *la)
            add_term(out, ta.coeff / (*lb)[0].coeff, ta.power - (*lb)[0].power);
          return out;
        }
        case BinaryOp::Pow: {
          if (b.depends_on(Var::X) || b.depends_on(Var::T)) return std::nullopt;
          double q;
          try {
            q = b.eval(0, 0, params);
          } catch (const EvalError&) {
            return std::nullopt;
          }
          auto la = laurent_rec(a, params);
          if (!la || la->size() != 1) return std::nullopt;
          const auto& ta = (*la)[0];
          Expr coeff = Expr::constant(1.0);
          if (auto cv = ta.coeff.simplified().constant_value()) {
            if (*cv != 1.0) coeff = pow(ta.coeff, Expr::constant(q));
          } else {
            coeff = pow(ta.coeff, Expr::constant(q));
          }
          return LTerms{{coeff.simplified(), ta.power * q}};
        }
      }
      return std::nullopt;
    }
    default:
      return std::nullopt;  // function of x: not a monomial sum
  }
}

Expr lterms_to_expr(const LTerms& ts) {
  Expr acc = Expr::constant(0.0);
  for (const auto& t : ts) {
    Expr piece = t.coeff;
    if (std::fabs(t.power - 1.0) < 1e-12)
      piece = piece * Expr::x();
    else if (std::fabs(t.power) >= 1e-12)
      piece = piece * pow(Expr::x(), Expr::constant(t.power));
    acc = acc + piece;
  }
  return acc.simplified();
}

// Integrates from x_min; fails on 1/x terms (would need a log).
std::optional<LTerms> lterms_integrate(const LTerms& ts, double x_min) {
  LTerms out;
  Expr base_const = Expr::constant(0.0);
  for (const auto& t : ts) {
    if (std::fabs(t.power + 1.0) < 1e-9) return std::nullopt;
    const double p1 = t.power + 1.0;
    const Expr c = (t.coeff / Expr::constant(p1)).simplified();
    add_term(out, c, p1);
    base_const = base_const - c * Expr::constant(std::pow(x_min, p1));
  }
  add_term(out, base_const.simplified(), 0.0);
  return out;
}

}  // namespace

std::optional<std::vector<LaurentTerm>> laurent_in_x(const Expr& e, const Params& params) {
  return laurent_rec(e.simplified(), params);
}

PotentialGrids build_v(const Expr& f, const Expr& g, const Expr& gamma,
                       const FreeFunctions& free, const GridSpec& grid,
                       const Params& params) {
  const RealField F = eval_on_grid(f.simplified(), grid, params);
  const RealField G = eval_on_grid(g.simplified(), grid, params);
  require_nonvanishing(F, "f");
  require_nonvanishing(G, "g");

  const Expr S = v_condition_source(f, g, gamma);
  const Expr integrand_expr =
      (-S / (Expr::constant(2.0) * pow(f, Expr::constant(3.0)) * pow(g, Expr::constant(5.0))))
          .simplified();

  const RealField Q0 = eval_on_grid(integrand_expr, grid, params);  // d/dx of v_x/g
  const RealField Q = cumint_x(Q0);
  const RealField Gx = eval_on_grid(g.diff(Var::X), grid, params);
  const auto C4 = eval_on_tline(free.c4.simplified(), grid, params);
  const auto C3 = eval_on_tline(free.c3.simplified(), grid, params);

  PotentialGrids out;
  out.v_x = RealField(grid);
  out.v_xx = RealField(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) {
      const double q = Q.at(i, j) + C4[j];
      out.v_x.at(i, j) = G.at(i, j) * q;
      out.v_xx.at(i, j) = Gx.at(i, j) * q + G.at(i, j) * Q0.at(i, j);
    }
  out.v = cumint_x(out.v_x);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) out.v.at(i, j) += C3[j];

  // Best-effort closed form: needs integrand and g as x-monomial sums and a
  // log-free double integration.
  auto lq = laurent_in_x(integrand_expr, params);
  auto lg = laurent_in_x(g, params);
  if (lq && lg) {
    if (auto lQ = lterms_integrate(*lq, grid.x_min)) {
      add_term(*lQ, free.c4, 0.0);  // v_x/g = Q + c4
      LTerms lvx;
      bool ok = lQ->size() * lg->size() <= 64;
      if (ok)
        for (const auto& ta : *lQ)
          for (const auto& tb : *lg) add_term(lvx, ta.coeff * tb.coeff, ta.power + tb.power);
      if (ok) {
        if (auto lv = lterms_integrate(lvx, grid.x_min)) {
          add_term(*lv, free.c3, 0.0);
          const Expr closed = lterms_to_expr(*lv);
          // verify on a subsample before reporting
          double scale = 1e-30, worst = 0;
          for (double v : out.v.data) scale = std::max(scale, std::fabs(v));
          bool good = true;
          try {
            for (int j = 0; j < grid.n_t && good; j += std::max(1, grid.n_t / 7))
              for (int i = 0; i < grid.n_x; i += std::max(1, grid.n_x / 11)) {
                const double c = closed.eval(grid.x(i), grid.t(j), params);
                worst = std::max(worst, std::fabs(c - out.v.at(i, j)));
                if (worst > 1e-7 * std::max(1.0, scale)) {
                  good = false;
                  break;
                }
              }
          } catch (const EvalError&) {
            good = false;
          }
          if (good) out.closed_form = closed;
        }
      }
    }
  }
  return out;
}

Expr build_v_timeonly(const Expr& f, const Expr& g, const Expr& gamma,
                      const FreeFunctions& free) {
  require_t_only(f, "f");
  require_t_only(g, "g");
  require_t_only(gamma, "gamma");
  const Expr ft = f.diff(Var::T), ftt = f.diff(Var::T, 2);
  const Expr gt = g.diff(Var::T), gtt = g.diff(Var::T, 2);
  const Expr gat = gamma.diff(Var::T);
  const Expr two = Expr::constant(2.0);
  const Expr num = -sq(g) * sq(ft) + f * g * (g * ftt + ft * (two * g * gamma - gt)) +
                   sq(f) * (two * sq(gt) - g * (gtt + Expr::constant(4.0) * gamma * gt) +
                            two * sq(g) * (gat + two * sq(gamma)));
  const Expr v2 = num / (Expr::constant(4.0) * pow(f, Expr::constant(3.0)) * sq(g));
  return (v2 * pow(Expr::x(), Expr::constant(2.0)) + free.c3 * Expr::x() + free.c4)
      .simplified();
}

}  // namespace nls

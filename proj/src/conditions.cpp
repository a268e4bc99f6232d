#include "nls/conditions.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nls {

namespace {

RealField ev(const Expr& e, const GridSpec& g, const Params& p) {
  return eval_on_grid(e.simplified(), g, p);
}

ResidualResult finish(std::string condition, const GridSpec& grid,
                      std::vector<double> residual, double normalization, double tol) {
  ResidualResult out;
  out.report.condition = std::move(condition);
  out.report.grid = grid;
  out.report.tolerance = tol;
  out.report.normalization = normalization;
  double mx = 0, s2 = 0;
  for (double r : residual) {
    mx = std::max(mx, std::fabs(r));
    s2 += r * r;
  }
  out.report.max_abs = mx;
  out.report.rms = residual.empty() ? 0.0 : std::sqrt(s2 / residual.size());
  out.report.pass = mx <= tol * std::max(1.0, normalization);
  out.values = std::move(residual);
  return out;
}

void require_t_only(const Expr& e, const char* what) {
  if (e.simplified().depends_on(Var::X))
    throw std::invalid_argument(std::string(what) + " must depend on t only");
}

}  // namespace

std::optional<PainleveQuadratic> decompose_quadratic_potential(const Expr& v) {
  const Expr vx = v.diff(Var::X);
  const Expr vxx = vx.diff(Var::X);
  if (vxx.depends_on(Var::X)) return std::nullopt;
  const Expr v2 = (vxx / Expr::constant(2.0)).simplified();
  const Expr v1 = (vx - Expr::constant(2.0) * v2 * Expr::x()).simplified();
  if (v1.depends_on(Var::X)) return std::nullopt;
  const Expr v0 =
      (v - v2 * pow(Expr::x(), Expr::constant(2.0)) - v1 * Expr::x()).simplified();
  if (v0.depends_on(Var::X)) return std::nullopt;
  return PainleveQuadratic{v0, v1, v2};
}

HGrids compute_H(const CoefficientSet& c, const GridSpec& grid) {
  if (!c.h) throw std::invalid_argument("compute_H: coefficient set has no drift term h");
  const Expr w = (Expr::constant(2.0) * *c.h / c.f).simplified();
  const RealField W = ev(w, grid, c.params);
  const RealField I = cumint_x(W);

  HGrids out;
  out.H = RealField(grid);
  for (int j = 0; j < grid.n_t; ++j)
    for (int i = 0; i < grid.n_x; ++i) {
      const double a = I.at(i, j);
      if (a > 700.0) {
        std::ostringstream os;
        os << "compute_H: exp overflow at (x = " << grid.x(i) << ", t = " << grid.t(j) << ")";
        throw EvalError(os.str());
      }
      out.H.at(i, j) = std::exp(a);
    }

  const RealField Wx = ev(w.diff(Var::X), grid, c.params);
  const RealField Wxx = ev(w.diff(Var::X, 2), grid, c.params);
  out.H_x = RealField(grid);
  out.H_xx = RealField(grid);
  out.H_xxx = RealField(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double H = out.H.data[k], W0 = W.data[k], W1 = Wx.data[k], W2 = Wxx.data[k];
    out.H_x.data[k] = H * W0;
    out.H_xx.data[k] = H * (W0 * W0 + W1);
    out.H_xxx.data[k] = H * (W0 * W0 * W0 + 3.0 * W0 * W1 + W2);
  }
  out.Ht_over_H = cumint_x(ev(w.diff(Var::T), grid, c.params));
  return out;
}

ResidualResult residual_fg(const CoefficientSet& c, const Expr& c1, const GridSpec& grid,
                           double tol) {
  require_t_only(c1, "c1");
  const RealField lhs = ev(c.f * c.g * c.g, grid, c.params);
  RealField rhs = ev(c1, grid, c.params);
  const bool hd = c.h.has_value();
  if (hd) {
    const HGrids H = compute_H(c, grid);
    for (std::size_t k = 0; k < grid.size(); ++k) rhs.data[k] *= H.H.data[k];
  }
  std::vector<double> r(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) r[k] = lhs.data[k] - rhs.data[k];
  const double norm = std::max(max_abs(lhs), max_abs(rhs));
  return finish(hd ? "fg-hd" : "fg", grid, std::move(r), norm, tol);
}

ResidualResult residual_gamma(const CoefficientSet& c, const Expr& c2, const GridSpec& grid,
                              double tol) {
  require_t_only(c2, "c2");
  const RealField Gam = ev(c.gamma, grid, c.params);
  const RealField Gtg = ev(c.g.diff(Var::T) / c.g, grid, c.params);
  const RealField Cc = ev(c2.diff(Var::T) / (Expr::constant(2.0) * c2), grid, c.params);
  const bool hd = c.h.has_value();
  std::vector<double> r(grid.size());
  double norm = std::max({max_abs(Gam), max_abs(Gtg), max_abs(Cc)});
  if (hd) {
    const HGrids H = compute_H(c, grid);
    double hterm = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double q = 0.25 * H.Ht_over_H.data[k];
      hterm = std::max(hterm, std::fabs(q));
      r[k] = Gam.data[k] - Gtg.data[k] + Cc.data[k] + q;
    }
    norm = std::max(norm, hterm);
  } else {
    for (std::size_t k = 0; k < grid.size(); ++k)
      r[k] = Gam.data[k] - Gtg.data[k] + Cc.data[k];
  }
  return finish(hd ? "gamma-hd" : "gamma", grid, std::move(r), norm, tol);
}

namespace {

struct CoeffFields {
  RealField F, Ft, Ftt, G, Gt, Gtt, Gx, Gxx, Gxxx, G4, Gam, Gamt;
};

CoeffFields load_coeff_fields(const CoefficientSet& c, const GridSpec& grid) {
  const Params& p = c.params;
  return CoeffFields{
      ev(c.f, grid, p),
      ev(c.f.diff(Var::T), grid, p),
      ev(c.f.diff(Var::T, 2), grid, p),
      ev(c.g, grid, p),
      ev(c.g.diff(Var::T), grid, p),
      ev(c.g.diff(Var::T, 2), grid, p),
      ev(c.g.diff(Var::X), grid, p),
      ev(c.g.diff(Var::X, 2), grid, p),
      ev(c.g.diff(Var::X, 3), grid, p),
      ev(c.g.diff(Var::X, 4), grid, p),
      ev(c.gamma, grid, p),
      ev(c.gamma.diff(Var::T), grid, p),
  };
}

// Residual of the fourth-order condition, grouped exactly as stated.
// Normalization is the largest single product term, which stays meaningful
// when whole groups cancel.
ResidualResult v_condition_residual(const CoeffFields& cf, const RealField& Vx,
                                    const RealField& Vxx, const GridSpec& grid, double tol) {
  const std::size_t n = grid.size();
  std::vector<double> r(n);
  double norm = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = cf.F.data[k], ft = cf.Ft.data[k], ftt = cf.Ftt.data[k];
    const double g = cf.G.data[k], gt = cf.Gt.data[k], gtt = cf.Gtt.data[k];
    const double gx = cf.Gx.data[k], gxx = cf.Gxx.data[k], gxxx = cf.Gxxx.data[k],
                 g4 = cf.G4.data[k];
    const double ga = cf.Gam.data[k], gat = cf.Gamt.data[k];
    const double vx = Vx.data[k], vxx = Vxx.data[k];
    const double f2 = f * f, f3 = f2 * f, f4 = f2 * f2;
    const double g2 = g * g, g3 = g2 * g, g4p = g2 * g2;

    const double t1 = f * g3 * (ft * (gt - 2.0 * g * ga) - ftt * g);
    const double t2 = ft * ft * g4p;
    const double t3 = 2.0 * f3 * g3 * (g * vxx - gx * vx);
    const double t4 =
        f2 * g2 * (g * (4.0 * gt * ga + gtt) - 2.0 * gt * gt - 2.0 * g2 * (gat + 2.0 * ga * ga));
    const double t5 = f4 * (36.0 * gx * gx * gx * gx - 48.0 * g * gxx * gx * gx +
                            10.0 * g2 * gxxx * gx + g2 * (6.0 * gxx * gxx - g * g4));
    r[k] = t1 + t2 + t3 + t4 + t5;

    const double pieces[] = {
        f * g3 * ft * gt, 2.0 * f * g4p * ft * ga, f * g4p * ftt,
        t2,
        2.0 * f3 * g4p * vxx, 2.0 * f3 * g3 * gx * vx,
        4.0 * f2 * g3 * gt * ga, f2 * g3 * gtt, 2.0 * f2 * g2 * gt * gt,
        2.0 * f2 * g4p * gat, 4.0 * f2 * g4p * ga * ga,
        36.0 * f4 * gx * gx * gx * gx, 48.0 * f4 * g * gxx * gx * gx,
        10.0 * f4 * g2 * gxxx * gx, 6.0 * f4 * g2 * gxx * gxx, f4 * g3 * g4,
    };
    for (double pc : pieces) norm = std::max(norm, std::fabs(pc));
  }
  ResidualResult out = finish("v", grid, std::move(r), norm, tol);
  return out;
}

}  // namespace

ResidualResult residual_v(const CoefficientSet& c, const GridSpec& grid, double tol) {
  const CoeffFields cf = load_coeff_fields(c, grid);
  const RealField Vx = ev(c.v.diff(Var::X), grid, c.params);
  const RealField Vxx = ev(c.v.diff(Var::X, 2), grid, c.params);
  return v_condition_residual(cf, Vx, Vxx, grid, tol);
}

ResidualResult residual_v(const CoefficientSet& c, const PotentialGrids& vg,
                          const GridSpec& grid, double tol) {
  if (!(vg.v.grid == grid)) throw std::invalid_argument("residual_v: potential grid mismatch");
  const CoeffFields cf = load_coeff_fields(c, grid);
  return v_condition_residual(cf, vg.v_x, vg.v_xx, grid, tol);
}

ResidualResult residual_painleve(const Expr& f, const Expr& g, const Expr& v2,
                                 const Params& params, const GridSpec& grid, double tol) {
  require_t_only(f, "f");
  require_t_only(g, "g");
  require_t_only(v2, "v2");
  const auto F = eval_on_tline(f.simplified(), grid, params);
  const auto Ft = eval_on_tline(f.diff(Var::T), grid, params);
  const auto Ftt = eval_on_tline(f.diff(Var::T, 2), grid, params);
  const auto G = eval_on_tline(g.simplified(), grid, params);
  const auto Gt = eval_on_tline(g.diff(Var::T), grid, params);
  const auto Gtt = eval_on_tline(g.diff(Var::T, 2), grid, params);
  const auto V2 = eval_on_tline(v2.simplified(), grid, params);

  std::vector<double> r(grid.n_t);
  double norm = 0;
  for (int j = 0; j < grid.n_t; ++j) {
    const double f = F[j], ft = Ft[j], ftt = Ftt[j];
    const double g = G[j], gt = Gt[j], gtt = Gtt[j];
    const double p1 = 4.0 * f * f * f * g * g * V2[j];
    const double p2 = f * g * (ft * gt + f * gtt);
    const double p3 = g * g * (ft * ft - f * ftt);
    const double p4 = -2.0 * f * f * gt * gt;
    const double pieces[] = {p1,          f * g * ft * gt, f * f * g * gtt,
                             g * g * ft * ft, g * g * f * ftt, p4};
    for (double pc : pieces) norm = std::max(norm, std::fabs(pc));
    r[j] = p1 + p2 + p3 + p4;
  }
  return finish("painleve", grid, std::move(r), norm, tol);
}

ResidualResult residual_v_hd(const CoefficientSet& c, const GridSpec& grid, double tol) {
  const Params& p = c.params;
  const RealField F = ev(c.f, grid, p);
  const RealField Ft = ev(c.f.diff(Var::T), grid, p);
  const RealField Ftt = ev(c.f.diff(Var::T, 2), grid, p);
  const RealField G = ev(c.g, grid, p);
  const RealField Gt = ev(c.g.diff(Var::T), grid, p);
  const RealField Gtt = ev(c.g.diff(Var::T, 2), grid, p);
  const RealField Gx = ev(c.g.diff(Var::X), grid, p);
  const RealField Gxx = ev(c.g.diff(Var::X, 2), grid, p);
  const RealField Gxxx = ev(c.g.diff(Var::X, 3), grid, p);
  const RealField G4 = ev(c.g.diff(Var::X, 4), grid, p);
  const RealField Gam = ev(c.gamma, grid, p);
  const RealField Gamt = ev(c.gamma.diff(Var::T), grid, p);
  const RealField Vx = ev(c.v.diff(Var::X), grid, p);
  const RealField Vxx = ev(c.v.diff(Var::X, 2), grid, p);

  RealField H(grid), Hx(grid), Hxx(grid), Hxxx(grid);
  if (c.h) {
    HGrids hg = compute_H(c, grid);
    H = std::move(hg.H);
    Hx = std::move(hg.H_x);
    Hxx = std::move(hg.H_xx);
    Hxxx = std::move(hg.H_xxx);
  } else {
    for (auto& v : H.data) v = 1.0;  // H_x, H_xx, H_xxx stay zero
  }

  const std::size_t n = grid.size();
  std::vector<double> r(n);
  double norm = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double f = F.data[k], ft = Ft.data[k], ftt = Ftt.data[k];
    const double g = G.data[k], gt = Gt.data[k], gtt = Gtt.data[k];
    const double gx = Gx.data[k], gxx = Gxx.data[k], gxxx = Gxxx.data[k], g4 = G4.data[k];
    const double ga = Gam.data[k], gat = Gamt.data[k];
    const double vx = Vx.data[k], vxx = Vxx.data[k];
    const double h0 = H.data[k], h1 = Hx.data[k], h2 = Hxx.data[k], h3 = Hxxx.data[k];
    const double g2 = g * g, g3 = g2 * g, f2 = f * f, f4 = f2 * f2, H2 = h0 * h0;

    const double th1 = -4.0 * f * g3 * H2 * (ft * (2.0 * g * ga - gt) + ftt * g);
    const double th2 = 4.0 * ft * ft * g2 * g2 * H2;
    const double th3 =
        4.0 * f * f2 * g3 * h0 * (vx * (g * h1 - 2.0 * gx * h0) + 2.0 * g * h0 * vxx);
    const double bracket =
        -g2 * h1 * (3.0 * (g * gxx - 2.0 * gx * gx) * h1 + g * gx * h2) -
        2.0 * g * h0 *
            (48.0 * gx * gx * gx * h1 - 10.0 * g * gx * gx * h2 +
             g * gx * (g * h3 - 42.0 * gxx * h1) +
             2.0 * g2 * (2.0 * gxx * h2 + 3.0 * gxxx * h1)) +
        4.0 *
            (36.0 * gx * gx * gx * gx - 48.0 * g * gxx * gx * gx + 10.0 * g2 * gxxx * gx +
             g2 * (6.0 * gxx * gxx - g * g4)) *
            H2;
    const double th4 = f4 * bracket;
    const double th5 =
        4.0 * f2 * g2 * H2 *
        (g * (4.0 * gt * ga + gtt) - 2.0 * gt * gt - 2.0 * g2 * (gat + 2.0 * ga * ga));
    r[k] = th1 + th2 + th3 + th4 + th5;

    const double g4p = g2 * g2;
    const double pieces[] = {
        8.0 * f * g4p * H2 * ft * ga, 4.0 * f * g3 * H2 * ft * gt, 4.0 * f * g4p * H2 * ftt,
        th2,
        4.0 * f * f2 * g4p * h0 * vx * h1, 8.0 * f * f2 * g3 * H2 * gx * vx,
        8.0 * f * f2 * g4p * H2 * vxx,
        3.0 * f4 * g3 * gxx * h1 * h1, 6.0 * f4 * g2 * gx * gx * h1 * h1,
        f4 * g3 * gx * h1 * h2,
        96.0 * f4 * g * gx * gx * gx * h0 * h1, 20.0 * f4 * g2 * gx * gx * h0 * h2,
        2.0 * f4 * g3 * gx * h0 * h3, 84.0 * f4 * g2 * gx * gxx * h0 * h1,
        8.0 * f4 * g3 * gxx * h0 * h2, 12.0 * f4 * g3 * gxxx * h0 * h1,
        144.0 * f4 * gx * gx * gx * gx * H2, 192.0 * f4 * g * gxx * gx * gx * H2,
        40.0 * f4 * g2 * gxxx * gx * H2, 24.0 * f4 * g2 * gxx * gxx * H2,
        4.0 * f4 * g3 * g4 * H2,
        16.0 * f2 * g3 * H2 * gt * ga, 4.0 * f2 * g3 * H2 * gtt,
        8.0 * f2 * g2 * H2 * gt * gt, 8.0 * f2 * g4p * H2 * gat,
        16.0 * f2 * g4p * H2 * ga * ga,
    };
    for (double pc : pieces) norm = std::max(norm, std::fabs(pc));
  }
  return finish("v-hd", grid, std::move(r), norm, tol);
}

}  // namespace nls

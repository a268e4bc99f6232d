#include "nls/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nls {

namespace {

using cplx = std::complex<double>;

RealField ev(const Expr& e, const GridSpec& g, const Params& p) {
  return eval_on_grid(e.simplified(), g, p);
}

}  // namespace

ResidualResult residual_of_candidate(const CoefficientSet& c, const CandidateSolution& psi,
                                     const GridSpec& grid, double tol,
                                     const RealField* v_override) {
  const Params& p = c.params;
  const RealField F = ev(c.f, grid, p);
  const RealField G = ev(c.g, grid, p);
  if (v_override && !(v_override->grid == grid))
    throw std::invalid_argument("residual_of_candidate: v_override grid mismatch");
  const RealField V = v_override ? *v_override : ev(c.v, grid, p);
  const RealField Gam = ev(c.gamma, grid, p);
  const bool drift = c.h.has_value();
  RealField Hd(grid);
  if (drift) Hd = ev(*c.h, grid, p);

  const RealField Pr = ev(psi.re, grid, p);
  const RealField Pi = ev(psi.im, grid, p);
  const RealField Prx = ev(psi.re.diff(Var::X), grid, p);
  const RealField Pix = ev(psi.im.diff(Var::X), grid, p);
  const RealField Prxx = ev(psi.re.diff(Var::X, 2), grid, p);
  const RealField Pixx = ev(psi.im.diff(Var::X, 2), grid, p);
  const RealField Prt = ev(psi.re.diff(Var::T), grid, p);
  const RealField Pit = ev(psi.im.diff(Var::T), grid, p);

  const std::size_t n = grid.size();
  std::vector<double> r(n);
  double norm = 0, mx = 0, s2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double re = Pr.data[k], im = Pi.data[k];
    const double amp2 = re * re + im * im;
    const double f = F.data[k], g = G.data[k], v = V.data[k], ga = Gam.data[k];
    const double hd = drift ? Hd.data[k] : 0.0;

    const double disp_re = f * Prxx.data[k], disp_im = f * Pixx.data[k];
    const double drft_re = hd * Prx.data[k], drft_im = hd * Pix.data[k];
    const double nl_re = g * amp2 * re, nl_im = g * amp2 * im;
    const double pot_re = v * re, pot_im = v * im;
    const double gain_re = -ga * im, gain_im = ga * re;  // i gamma Psi
    const double time_re = -Pit.data[k], time_im = Prt.data[k];  // i Psi_t

    const double rre = disp_re + drft_re + nl_re + pot_re + gain_re + time_re;
    const double rim = disp_im + drft_im + nl_im + pot_im + gain_im + time_im;
    r[k] = std::hypot(rre, rim);
    mx = std::max(mx, r[k]);
    s2 += r[k] * r[k];
    norm = std::max({norm, std::hypot(disp_re, disp_im), std::hypot(drft_re, drft_im),
                     std::hypot(nl_re, nl_im), std::hypot(pot_re, pot_im),
                     std::hypot(gain_re, gain_im), std::hypot(time_re, time_im)});
  }
  ResidualResult out;
  out.report.condition = "pde-candidate";
  out.report.grid = grid;
  out.report.tolerance = tol;
  out.report.normalization = norm;
  out.report.max_abs = mx;
  out.report.rms = std::sqrt(s2 / static_cast<double>(n));
  out.report.pass = mx <= tol * std::max(1.0, norm);
  out.values = std::move(r);
  return out;
}

std::vector<std::complex<double>> sample_candidate(const CandidateSolution& psi,
                                                   const CoefficientSet& c,
                                                   const GridSpec& grid, double t) {
  const CompiledExpr re(psi.re.simplified(), c.params);
  const CompiledExpr im(psi.im.simplified(), c.params);
  std::vector<cplx> out(grid.n_x);
  for (int i = 0; i < grid.n_x; ++i) out[i] = {re.eval(grid.x(i), t), im.eval(grid.x(i), t)};
  return out;
}

double l2_norm(std::span<const cplx> row, double dx) {
  double s = 0;
  for (const auto& z : row) s += std::norm(z);
  return std::sqrt(dx * s);
}

double linf_diff(std::span<const cplx> a, std::span<const cplx> b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace {

// One coefficient row evaluator with a static-cache for t-independent
// expressions.
class CoeffRow {
 public:
  CoeffRow(const Expr& e, const GridSpec& grid, const Params& params)
      : grid_(grid), ce_(e.simplified(), params), static_(!e.depends_on(Var::T)) {
    if (static_) fill(0.0, cache_);
  }

  const std::vector<double>& at(double t) {
    if (static_) return cache_;
    fill(t, cache_);
    return cache_;
  }

 private:
  void fill(double t, std::vector<double>& out) {
    out.resize(grid_.n_x);
    for (int i = 0; i < grid_.n_x; ++i) out[i] = ce_.eval(grid_.x(i), t);
  }
  GridSpec grid_;
  CompiledExpr ce_;
  bool static_;
  std::vector<double> cache_;
};

// Thomas solve for a complex tridiagonal system; rhs is overwritten with the
// solution. The Crank-Nicolson matrix is strongly diagonally dominant here.
void tridiag_solve(std::vector<cplx>& a, std::vector<cplx>& b, std::vector<cplx>& cc,
                   std::vector<cplx>& rhs) {
  const std::size_t n = b.size();
  for (std::size_t i = 1; i < n; ++i) {
    const cplx m = a[i] / b[i - 1];
    b[i] -= m * cc[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] /= b[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - cc[i] * rhs[i + 1]) / b[i];
}

}  // namespace

PropagationResult propagate(const CoefficientSet& c, std::span<const cplx> psi0,
                            const GridSpec& grid, double T, const SolverConfig& cfg,
                            const std::optional<CandidateSolution>& psi_ref) {
  if (cfg.dt <= 0.0) throw std::invalid_argument("propagate: dt must be positive");
  if (T <= 0.0) throw std::invalid_argument("propagate: T must be positive");
  if (grid.n_x < 5) throw std::invalid_argument("propagate: need n_x >= 5");
  if (psi0.size() != static_cast<std::size_t>(grid.n_x))
    throw std::invalid_argument("propagate: psi0 length does not match the grid");
  if (cfg.boundary == SolverConfig::Boundary::AnalyticDirichlet && !psi_ref)
    throw std::invalid_argument("propagate: analytic-Dirichlet boundaries need psi_ref");

  const int n_steps = std::max(1, static_cast<int>(std::llround(T / cfg.dt)));
  const double dt = T / n_steps;
  const double t0 = grid.t_min;
  const int nx = grid.n_x;
  const double dx = grid.dx();

  const GridSpec out_grid =
      GridSpec::make(grid.x_min, grid.x_max, nx, t0, t0 + T, n_steps + 1);

  CoeffRow Frow(c.f, grid, c.params);
  CoeffRow Grow(c.g, grid, c.params);
  CoeffRow Vrow(c.v, grid, c.params);
  CoeffRow Gamrow(c.gamma, grid, c.params);
  std::optional<CoeffRow> Hrow;
  if (c.h) Hrow.emplace(*c.h, grid, c.params);

  std::optional<CompiledExpr> bre, bim;
  if (psi_ref) {
    bre.emplace(psi_ref->re.simplified(), c.params);
    bim.emplace(psi_ref->im.simplified(), c.params);
  }
  auto boundary_value = [&](double x, double t) -> cplx {
    if (cfg.boundary == SolverConfig::Boundary::ZeroDirichlet) return {0.0, 0.0};
    return {bre->eval(x, t), bim->eval(x, t)};
  };

  PropagationResult result;
  result.psi = ComplexField(out_grid);
  std::vector<cplx> cur(psi0.begin(), psi0.end());
  for (int i = 0; i < nx; ++i) result.psi.at(i, 0) = cur[i];

  const int m = nx - 2;  // interior unknowns
  std::vector<cplx> sub(m), diag(m), sup(m), rhs(m), next(cur.begin(), cur.end());
  std::vector<double> W(nx);
  const cplx I(0.0, 1.0);

  for (int step = 0; step < n_steps; ++step) {
    const double tn = t0 + step * dt;
    const double tmid = tn + 0.5 * dt;
    const auto& F = Frow.at(tmid);
    const auto& G = Grow.at(tmid);
    const auto& V = Vrow.at(tmid);
    const auto& Gam = Gamrow.at(tmid);
    const std::vector<double>* Hd = Hrow ? &Hrow->at(tmid) : nullptr;

    // cur[] already carries the time-level-n boundary values.
    const cplx bc_lo_np = boundary_value(grid.x_min, tn + dt);
    const cplx bc_hi_np = boundary_value(grid.x_max, tn + dt);

    std::copy(cur.begin(), cur.end(), next.begin());
    next[0] = bc_lo_np;
    next[nx - 1] = bc_hi_np;

    double delta = 0;
    int iter = 0;
    for (iter = 0; iter < cfg.max_fixpoint_iters; ++iter) {
      for (int i = 0; i < nx; ++i) W[i] = 0.25 * std::norm(cur[i] + next[i]);

      // Assemble (I - dt/2 L) psi^{n+1} = (I + dt/2 L) psi^n with the frozen
      // nonlinearity inside L.
      for (int i = 1; i < nx - 1; ++i) {
        const double f = F[i], hd = Hd ? (*Hd)[i] : 0.0;
        const cplx off_p = I * (f / (dx * dx) + hd / (2.0 * dx));
        const cplx off_m = I * (f / (dx * dx) - hd / (2.0 * dx));
        const cplx mid = I * (-2.0 * f / (dx * dx) + V[i] + G[i] * W[i]) - Gam[i];
        // explicit side
        const cplx ln = off_m * cur[i - 1] + mid * cur[i] + off_p * cur[i + 1];
        rhs[i - 1] = cur[i] + 0.5 * dt * ln;
        sub[i - 1] = -0.5 * dt * off_m;
        diag[i - 1] = 1.0 - 0.5 * dt * mid;
        sup[i - 1] = -0.5 * dt * off_p;
      }
      // boundary coupling of the implicit side
      {
        const double f1 = F[1], hd1 = Hd ? (*Hd)[1] : 0.0;
        rhs[0] += 0.5 * dt * (I * (f1 / (dx * dx) - hd1 / (2.0 * dx))) * bc_lo_np;
        const double f2 = F[nx - 2], hd2 = Hd ? (*Hd)[nx - 2] : 0.0;
        rhs[m - 1] += 0.5 * dt * (I * (f2 / (dx * dx) + hd2 / (2.0 * dx))) * bc_hi_np;
      }

      tridiag_solve(sub, diag, sup, rhs);

      double scale = 0;
      delta = 0;
      for (int i = 1; i < nx - 1; ++i) {
        delta = std::max(delta, std::abs(rhs[i - 1] - next[i]));
        scale = std::max(scale, std::abs(rhs[i - 1]));
        next[i] = rhs[i - 1];
      }
      if (delta <= cfg.fixpoint_tol * std::max(1.0, scale)) break;
    }
    if (iter == cfg.max_fixpoint_iters) {
      std::ostringstream os;
      os << "propagate: nonlinearity fixed point did not converge at t = " << tn
         << " after " << iter << " iterations (last delta " << delta << ")";
      throw FixpointDivergence(os.str(), iter, delta);
    }
    result.worst_iterations = std::max(result.worst_iterations, iter + 1);
    result.worst_delta = std::max(result.worst_delta, delta);

    std::swap(cur, next);
    for (int i = 0; i < nx; ++i) result.psi.at(i, step + 1) = cur[i];
  }
  return result;
}

std::vector<ConvergenceRow> convergence_study(const CoefficientSet& c,
                                              const CandidateSolution& psi_ref,
                                              const GridSpec& grid, double T,
                                              const SolverConfig& cfg, int refinements) {
  if (refinements < 2) throw std::invalid_argument("convergence_study: need at least 2 levels");
  std::vector<ConvergenceRow> rows;
  std::vector<double> errors;
  for (int level = 0; level < refinements; ++level) {
    const int nx = ((grid.n_x - 1) << level) + 1;
    SolverConfig lc = cfg;
    lc.dt = cfg.dt / static_cast<double>(1 << level);
    const GridSpec lg =
        GridSpec::make(grid.x_min, grid.x_max, nx, grid.t_min, grid.t_max, grid.n_t);
    const auto psi0 = sample_candidate(psi_ref, c, lg, lg.t_min);
    const auto run = propagate(c, psi0, lg, T, lc, psi_ref);
    const GridSpec& og = run.psi.grid;
    const auto ref = sample_candidate(psi_ref, c, lg, og.t_max);
    std::vector<cplx> last(og.n_x);
    for (int i = 0; i < og.n_x; ++i) last[i] = run.psi.at(i, og.n_t - 1);
    ConvergenceRow row;
    row.dx = lg.dx();
    row.dt = lc.dt;
    row.l_inf = linf_diff(last, ref);
    {
      std::vector<cplx> diff(og.n_x);
      for (int i = 0; i < og.n_x; ++i) diff[i] = last[i] - ref[i];
      row.l2 = l2_norm(diff, lg.dx());
    }
    row.observed_order = std::numeric_limits<double>::quiet_NaN();
    row.anomaly = false;
    if (!errors.empty()) {
      row.observed_order = std::log2(errors.back() / row.l_inf);
      row.anomaly = row.l_inf >= 3.0 * errors.back();
    }
    errors.push_back(row.l_inf);
    rows.push_back(row);
  }
  return rows;
}

std::vector<bool> flag_anomalies(std::span<const double> errors) {
  std::vector<bool> out(errors.size(), false);
  for (std::size_t i = 1; i < errors.size(); ++i)
    out[i] = errors[i] >= 3.0 * errors[i - 1];
  return out;
}

}  // namespace nls

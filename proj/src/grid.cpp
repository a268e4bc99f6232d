#include "nls/grid.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nls {

GridSpec GridSpec::make(double x_min, double x_max, int n_x, double t_min, double t_max, int n_t,
                        std::span<const double> singular_x, std::span<const double> singular_t) {
  if (!(x_min < x_max)) throw std::invalid_argument("grid: x_min must be < x_max");
  if (n_x < 3) throw std::invalid_argument("grid: n_x must be >= 3");
  if (!(t_min <= t_max)) throw std::invalid_argument("grid: t_min must be <= t_max");
  if (n_t < 1) throw std::invalid_argument("grid: n_t must be >= 1");
  if (n_t == 1 && t_min != t_max) throw std::invalid_argument("grid: n_t == 1 requires t_min == t_max");
  for (double s : singular_x)
    if (s >= x_min && s <= x_max) {
      std::ostringstream os;
      os << "grid: x interval [" << x_min << ", " << x_max << "] contains declared singularity x = " << s;
      throw std::invalid_argument(os.str());
    }
  for (double s : singular_t)
    if (s >= t_min && s <= t_max) {
      std::ostringstream os;
      os << "grid: t interval [" << t_min << ", " << t_max << "] contains declared singularity t = " << s;
      throw std::invalid_argument(os.str());
    }
  GridSpec g;
  g.x_min = x_min;
  g.x_max = x_max;
  g.n_x = n_x;
  g.t_min = t_min;
  g.t_max = t_max;
  g.n_t = n_t;
  return g;
}

RealField eval_on_grid(const Expr& e, const GridSpec& grid, const Params& params) {
  RealField out(grid);
  const CompiledExpr ce(e, params);
  for (int j = 0; j < grid.n_t; ++j) {
    const double t = grid.t(j);
    auto row = out.row(j);
    for (int i = 0; i < grid.n_x; ++i) {
      try {
        row[i] = ce.eval(grid.x(i), t);
      } catch (const EvalError& err) {
        // Re-run through the tree evaluator, which names the offending
        // subexpression, and pin the grid location either way.
        std::string what = err.what();
        try {
          e.eval(grid.x(i), t, params);
        } catch (const EvalError& named) {
          what = named.what();
        }
        std::ostringstream os;
        os << what << " at (x = " << grid.x(i) << ", t = " << t << ")";
        throw EvalError(os.str());
      }
    }
  }
  return out;
}

std::vector<double> eval_on_tline(const Expr& e, const GridSpec& grid, const Params& params) {
  if (e.depends_on(Var::X)) throw std::invalid_argument("expression must depend on t only");
  std::vector<double> out(grid.n_t);
  const CompiledExpr ce(e, params);
  for (int j = 0; j < grid.n_t; ++j) {
    try {
      out[j] = ce.eval(grid.x_min, grid.t(j));
    } catch (const EvalError& err) {
      std::ostringstream os;
      os << err.what() << " at (t = " << grid.t(j) << ")";
      throw EvalError(os.str());
    }
  }
  return out;
}

std::vector<double> cumint_row(std::span<const double> y, double dx) {
  const std::size_t n = y.size();
  if (n < 3) throw std::invalid_argument("cumint: need at least 3 points");
  std::vector<double> F(n, 0.0);
  // Even offsets: Simpson over the preceding pair of intervals.
  for (std::size_t k = 2; k < n; k += 2)
    F[k] = F[k - 2] + dx / 3.0 * (y[k - 2] + 4.0 * y[k - 1] + y[k]);
  // Odd offsets: integrate the quadratic through the surrounding triple.
  for (std::size_t k = 1; k < n; k += 2) {
    if (k + 1 < n)
      F[k] = F[k - 1] + dx / 12.0 * (5.0 * y[k - 1] + 8.0 * y[k] - y[k + 1]);
    else
      F[k] = F[k - 1] + dx / 2.0 * (y[k - 1] + y[k]);  // final odd interval
  }
  return F;
}

RealField cumint_x(const RealField& samples, double x0) {
  const GridSpec& g = samples.grid;
  if (std::fabs(x0 - g.x_min) > 1e-12 * std::max(1.0, std::fabs(g.x_min)))
    throw std::invalid_argument("cumint_x: base point must equal grid x_min");
  return cumint_x(samples);
}

RealField cumint_x(const RealField& samples) {
  const GridSpec& g = samples.grid;
  RealField out(g);
  for (int j = 0; j < g.n_t; ++j) {
    auto F = cumint_row(samples.row(j), g.dx());
    auto row = out.row(j);
    for (int i = 0; i < g.n_x; ++i) row[i] = F[i];
  }
  return out;
}

RealField fd_x(const RealField& f) {
  const GridSpec& g = f.grid;
  RealField out(g);
  const double h = g.dx();
  for (int j = 0; j < g.n_t; ++j) {
    auto y = f.row(j);
    auto d = out.row(j);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
    for (int i = 1; i < g.n_x - 1; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
    d[g.n_x - 1] = (3.0 * y[g.n_x - 1] - 4.0 * y[g.n_x - 2] + y[g.n_x - 3]) / (2.0 * h);
  }
  return out;
}

RealField fd_xx(const RealField& f) {
  const GridSpec& g = f.grid;
  if (g.n_x < 4) throw std::invalid_argument("fd_xx: need at least 4 points");
  RealField out(g);
  const double h2 = g.dx() * g.dx();
  for (int j = 0; j < g.n_t; ++j) {
    auto y = f.row(j);
    auto d = out.row(j);
    d[0] = (2.0 * y[0] - 5.0 * y[1] + 4.0 * y[2] - y[3]) / h2;
    for (int i = 1; i < g.n_x - 1; ++i) d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h2;
    const int n = g.n_x;
    d[n - 1] = (2.0 * y[n - 1] - 5.0 * y[n - 2] + 4.0 * y[n - 3] - y[n - 4]) / h2;
  }
  return out;
}

RealField fd_t(const RealField& f) {
  const GridSpec& g = f.grid;
  if (g.n_t < 3) throw std::invalid_argument("fd_t: need at least 3 time levels");
  RealField out(g);
  const double h = g.dt();
  for (int i = 0; i < g.n_x; ++i) {
    out.at(i, 0) = (-3.0 * f.at(i, 0) + 4.0 * f.at(i, 1) - f.at(i, 2)) / (2.0 * h);
    for (int j = 1; j < g.n_t - 1; ++j)
      out.at(i, j) = (f.at(i, j + 1) - f.at(i, j - 1)) / (2.0 * h);
    out.at(i, g.n_t - 1) =
        (3.0 * f.at(i, g.n_t - 1) - 4.0 * f.at(i, g.n_t - 2) + f.at(i, g.n_t - 3)) / (2.0 * h);
  }
  return out;
}

double max_abs(const RealField& f) {
  double m = 0;
  for (double v : f.data) m = std::max(m, std::fabs(v));
  return m;
}

double rms(const RealField& f) {
  if (f.data.empty()) return 0;
  double s = 0;
  for (double v : f.data) s += v * v;
  return std::sqrt(s / static_cast<double>(f.data.size()));
}

}  // namespace nls

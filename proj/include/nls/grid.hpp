#pragma once

// Uniform space-time rectangles, sampled fields, cumulative quadrature and
// finite-difference helpers.

#include <complex>
#include <span>
#include <vector>

#include "nls/expr.hpp"

namespace nls {

struct GridSpec {
  double x_min = 0, x_max = 1;
  int n_x = 3;
  double t_min = 0, t_max = 0;
  int n_t = 1;

  // Validates ranges and rejects grids whose x (or t) interval contains a
  // declared singular locus.
  static GridSpec make(double x_min, double x_max, int n_x, double t_min, double t_max, int n_t,
                       std::span<const double> singular_x = {},
                       std::span<const double> singular_t = {});

  double dx() const { return n_x > 1 ? (x_max - x_min) / (n_x - 1) : 0.0; }
  double dt() const { return n_t > 1 ? (t_max - t_min) / (n_t - 1) : 0.0; }
  double x(int i) const { return x_min + i * dx(); }
  double t(int j) const { return t_min + j * dt(); }
  std::size_t size() const { return static_cast<std::size_t>(n_x) * n_t; }

  bool operator==(const GridSpec&) const = default;
};

// Samples stored row-major by time level: index = jt * n_x + ix.
struct RealField {
  GridSpec grid;
  std::vector<double> data;

  RealField() = default;
  explicit RealField(const GridSpec& g) : grid(g), data(g.size(), 0.0) {}
  double& at(int ix, int jt) { return data[static_cast<std::size_t>(jt) * grid.n_x + ix]; }
  double at(int ix, int jt) const { return data[static_cast<std::size_t>(jt) * grid.n_x + ix]; }
  std::span<double> row(int jt) { return {data.data() + static_cast<std::size_t>(jt) * grid.n_x, static_cast<std::size_t>(grid.n_x)}; }
  std::span<const double> row(int jt) const { return {data.data() + static_cast<std::size_t>(jt) * grid.n_x, static_cast<std::size_t>(grid.n_x)}; }
};

struct ComplexField {
  GridSpec grid;
  std::vector<std::complex<double>> data;

  ComplexField() = default;
  explicit ComplexField(const GridSpec& g) : grid(g), data(g.size(), {0.0, 0.0}) {}
  std::complex<double>& at(int ix, int jt) { return data[static_cast<std::size_t>(jt) * grid.n_x + ix]; }
  std::complex<double> at(int ix, int jt) const { return data[static_cast<std::size_t>(jt) * grid.n_x + ix]; }
};

// Evaluates an expression at every grid point. Domain errors are rethrown
// with the offending (x, t) location appended.
RealField eval_on_grid(const Expr& e, const GridSpec& grid, const Params& params = {});

// Evaluates a t-only expression along the time axis.
std::vector<double> eval_on_tline(const Expr& e, const GridSpec& grid, const Params& params = {});

// Per-time-row cumulative integral with F(x_min, t) = 0: composite Simpson
// on successive point pairs, local quadratic for the in-between points and
// a trapezoid on the final odd interval. x0 must equal the grid x_min.
RealField cumint_x(const RealField& samples, double x0);
RealField cumint_x(const RealField& samples);
std::vector<double> cumint_row(std::span<const double> y, double dx);

// Second-order finite differences (centered inside, one-sided at edges).
RealField fd_x(const RealField& f);
RealField fd_xx(const RealField& f);
RealField fd_t(const RealField& f);

double max_abs(const RealField& f);
double rms(const RealField& f);

}  // namespace nls

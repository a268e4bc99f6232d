#pragma once

// Integrability-condition residuals on grids. Every residual report is
// normalized by the largest single term so that pass/fail is scale-free.

#include <optional>
#include <string>

#include "nls/expr.hpp"
#include "nls/grid.hpp"

namespace nls {

inline constexpr double kDefaultTol = 1e-8;
inline constexpr double kQuadratureTol = 1e-6;

// Coefficients of  f Psi_xx + h Psi_x + g |Psi|^2 Psi + v Psi + i gamma Psi
// + i Psi_t = 0.  h absent means no drift term.
struct CoefficientSet {
  Expr f{1.0}, g{1.0}, gamma{0.0}, v{0.0};
  std::optional<Expr> h;
  Params params;
};

// Potential sampled on a grid together with its first two x-derivatives as
// produced by the constructor (derivatives exact through the quadrature, not
// finite differences).
struct PotentialGrids {
  RealField v, v_x, v_xx;
  std::optional<Expr> closed_form;
};

struct ResidualReport {
  std::string condition;
  GridSpec grid;
  double max_abs = 0;
  double rms = 0;
  double normalization = 0;  // max abs of the largest single term
  double tolerance = kDefaultTol;
  bool pass = false;  // max_abs <= tolerance * max(1, normalization)
};

struct ResidualResult {
  ResidualReport report;
  std::vector<double> values;  // residual samples (grid row-major, or per-t)
};

// v0 + v1 x + v2 x^2 with t-only coefficients.
struct PainleveQuadratic {
  Expr v0, v1, v2;
};

// Splits a potential that is quadratic in x with t-only coefficients;
// nullopt when it is not of that shape.
std::optional<PainleveQuadratic> decompose_quadratic_potential(const Expr& v);

// Drift weight H = exp(int 2h/f dx), normalized to H(x_min, t) = 1, with
// derivatives carried analytically through the quadrature: H_x = H w,
// H_xx = H (w^2 + w_x), H_xxx = H (w^3 + 3 w w_x + w_xx) for w = 2h/f.
struct HGrids {
  RealField H, H_x, H_xx, H_xxx;
  RealField Ht_over_H;  // cumulative integral of d(2h/f)/dt
};
HGrids compute_H(const CoefficientSet& c, const GridSpec& grid);

// f g^2 = c1 (times H when a drift term is present).
ResidualResult residual_fg(const CoefficientSet& c, const Expr& c1, const GridSpec& grid,
                           double tol = kDefaultTol);

// gamma = g_t/g - c2'/(2 c2) (minus H_t/(4H) when a drift term is present).
ResidualResult residual_gamma(const CoefficientSet& c, const Expr& c2, const GridSpec& grid,
                              double tol = kDefaultTol);

// The full fourth-order condition linking f, g, gamma, v; all derivatives
// symbolic. The overload taking PotentialGrids uses the sampled potential.
ResidualResult residual_v(const CoefficientSet& c, const GridSpec& grid,
                          double tol = kDefaultTol);
ResidualResult residual_v(const CoefficientSet& c, const PotentialGrids& vg,
                          const GridSpec& grid, double tol = kQuadratureTol);

// Time-only condition 4 f^3 g^2 v2 + f g (f' g' + f g'') + g^2 (f'^2 - f f'')
// - 2 f^2 g'^2 = 0. Inputs must not depend on x.
ResidualResult residual_painleve(const Expr& f, const Expr& g, const Expr& v2,
                                 const Params& params, const GridSpec& grid,
                                 double tol = kDefaultTol);

// Higher-dimensional condition with the drift weight H, evaluated exactly as
// stated (carries an overall factor 4 relative to the h = 0 condition).
ResidualResult residual_v_hd(const CoefficientSet& c, const GridSpec& grid,
                             double tol = kDefaultTol);

}  // namespace nls

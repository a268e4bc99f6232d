#pragma once

// Builds integrable coefficient sets from a seed nonlinearity g(x,t) and the
// free functions: f and gamma in closed form, v by solving the fourth-order
// condition as a second-order ODE in x per time slice.

#include <optional>

#include "nls/conditions.hpp"

namespace nls {

// t-only free functions. k1i never enters the numeric path; it is carried
// for scenario files only.
struct FreeFunctions {
  Expr c1{1.0}, c2{1.0}, c3{0.0}, c4{0.0}, k1i{0.0};
};

// f = c1 / g^2
Expr build_f(const Expr& g, const Expr& c1);

// gamma = g_t/g - c2'/(2 c2)
Expr build_gamma(const Expr& g, const Expr& c2);

// Sum of coeff(t) * x^power terms; the best-effort closed-form carrier.
struct LaurentTerm {
  Expr coeff;
  double power;
};

// Recognizes e as a finite sum of x-monomials with t-only coefficients.
// Exponents must evaluate to numbers under the given parameters.
std::optional<std::vector<LaurentTerm>> laurent_in_x(const Expr& e, const Params& params);

// Solves  2 f^3 g^3 (g v_xx - g_x v_x) = -S(x,t)  via
// v_x = g (cumint(-S / (2 f^3 g^5)) + c4),  v = cumint(v_x) + c3.
// The kernel of the operator is spanned by 1 (c3) and int g dx (c4-weighted,
// scaled so the homogeneous case reproduces v = c3 + c4 x on an x_min = 0
// grid). v_x and v_xx are returned exact through the quadrature. A closed
// form is attached when integrand and g are recognized as x-monomial sums
// and the result verifies against the grid.
PotentialGrids build_v(const Expr& f, const Expr& g, const Expr& gamma,
                       const FreeFunctions& free, const GridSpec& grid,
                       const Params& params);

// Time-only coefficients: v = v2(t) x^2 + c3 x + c4 with v2 in closed form.
Expr build_v_timeonly(const Expr& f, const Expr& g, const Expr& gamma,
                      const FreeFunctions& free);

// The v-free part S of the fourth-order condition (everything except the
// 2 f^3 g^3 (g v_xx - g_x v_x) group), as a symbolic expression.
Expr v_condition_source(const Expr& f, const Expr& g, const Expr& gamma);

}  // namespace nls

#pragma once

// Numerical verification of the reduced Lax-pair compatibility system: eight
// scalar constraints on the auxiliary functions f1, f7, g1, g13, g6, g10 and
// the pair (p1, p2). Auxiliary functions may be complex; they are carried as
// (re, im) expression pairs and residuals are reported as complex moduli.

#include <vector>

#include "nls/conditions.hpp"

namespace nls {

struct ComplexExpr {
  Expr re{0.0}, im{0.0};
};

ComplexExpr operator+(const ComplexExpr& a, const ComplexExpr& b);
ComplexExpr operator-(const ComplexExpr& a, const ComplexExpr& b);
ComplexExpr operator*(const ComplexExpr& a, const ComplexExpr& b);
ComplexExpr operator*(const Expr& a, const ComplexExpr& b);
ComplexExpr times_i(const ComplexExpr& a);
ComplexExpr cdiff(const ComplexExpr& a, Var v);

struct LaxFunctions {
  ComplexExpr f1, f7, g1, g13, g6, g10, p1, p2;
  double lambda = 0.0;  // bound as parameter "lambda" during evaluation
};

// The eight compatibility residuals in the order
// eq2, eq8, eq5, eq3, eq7, eq4, eq6, eq1:
//   eq2: f1_t - g1_x                        eq8: f7_t - g13_x
//   eq5: 2 f p1 p2 + g
//   eq3: f_x p1 - f p1 (f1 - f7) + f p1_x - g6
//   eq7: f_x p2 + f p2 (f1 - f7) + f p2_x - g10
//   eq4: g6 (f1 - f7) - i p1 (g1 - g13 - i v + gamma) - g6_x + i p1_t
//   eq6: g10 (f1 - f7) + i p2 (g1 - g13 - i v - gamma) + g10_x + i p2_t
//   eq1: (f p1 p2)_x + g10 p1 + g6 p2
std::vector<ResidualResult> compat_residuals(const LaxFunctions& L, const CoefficientSet& c,
                                             const GridSpec& grid, double tol = kDefaultTol);

// Constant-coefficient instance satisfying all eight constraints on the
// homogeneous scenario (f = g = 1, gamma = v = 0):
// p1 = 1, p2 = -1/2, f1 = -i lambda = -f7, g6 = 2 i lambda p1,
// g10 = -2 i lambda p2, g1 - g13 = i (f1 - f7)^2 = -4 i lambda^2.
LaxFunctions akns_case1(double lambda);

}  // namespace nls

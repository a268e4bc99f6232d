#pragma once

// Scenario-level check orchestration: picks the conditions applicable to a
// scenario and runs them at the right tolerance class.

#include "nls/scenario.hpp"

namespace nls {

// Gauge scenarios are validated against the similarity consistency system
// (the coordinate/gauge equations eq11-eq16, finite differences where the
// quantities are quadrature-valued) plus the exact-solution residual when
// psi_ref is present. Other scenarios run the f-g relation, the gamma
// relation and the fourth-order v condition (drift-weighted when h is
// present; against the sampled potential when v was built by quadrature),
// plus the time-only quadratic condition when the coefficients are t-only
// with gamma identically zero and a quadratic potential.
std::vector<ResidualResult> scenario_check(const Scenario& s, double tol = kDefaultTol);

// The similarity consistency suite on its own.
std::vector<ResidualResult> gauge_consistency(const Scenario& s, double tol = kDefaultTol);

}  // namespace nls

#pragma once

// Time propagation of  i Psi_t = -[f Psi_xx + h Psi_x + g |Psi|^2 Psi
// + v Psi] - i gamma Psi  with Crank-Nicolson in time, second-order centered
// stencils in space and the nonlinearity frozen at the implicit midpoint and
// iterated to a fixed point. Also evaluates pointwise PDE residuals of
// analytic candidate solutions.

#include <complex>
#include <optional>
#include <span>

#include "nls/conditions.hpp"

namespace nls {

struct CandidateSolution {
  Expr re{0.0}, im{0.0};
};

struct SolverConfig {
  double dt = 1e-3;
  enum class Boundary { ZeroDirichlet, AnalyticDirichlet };
  Boundary boundary = Boundary::ZeroDirichlet;
  double fixpoint_tol = 1e-12;
  int max_fixpoint_iters = 50;
};

class FixpointDivergence : public std::runtime_error {
 public:
  FixpointDivergence(const std::string& msg, int iterations, double last_delta)
      : std::runtime_error(msg), iterations(iterations), last_delta(last_delta) {}
  int iterations;
  double last_delta;
};

// Pointwise residual of the PDE for a symbolic candidate; all derivatives
// symbolic through the expression engine. v_override supplies a sampled
// potential in place of c.v (the potential enters undifferentiated).
ResidualResult residual_of_candidate(const CoefficientSet& c, const CandidateSolution& psi,
                                     const GridSpec& grid, double tol = kDefaultTol,
                                     const RealField* v_override = nullptr);

struct PropagationResult {
  ComplexField psi;        // every time level, including the initial one
  int worst_iterations = 0;
  double worst_delta = 0;  // largest accepted fixed-point update
};

// psi0 lives on the x-grid of `grid`; time advances from grid.t_min over the
// duration T in steps of cfg.dt (snapped so an integer number of steps lands
// exactly on T). Analytic-Dirichlet boundaries require psi_ref.
PropagationResult propagate(const CoefficientSet& c, std::span<const std::complex<double>> psi0,
                            const GridSpec& grid, double T, const SolverConfig& cfg,
                            const std::optional<CandidateSolution>& psi_ref = std::nullopt);

// Samples a candidate on one time level.
std::vector<std::complex<double>> sample_candidate(const CandidateSolution& psi,
                                                   const CoefficientSet& c,
                                                   const GridSpec& grid, double t);

double l2_norm(std::span<const std::complex<double>> row, double dx);
double linf_diff(std::span<const std::complex<double>> a,
                 std::span<const std::complex<double>> b);

struct ConvergenceRow {
  double dx, dt, l_inf, l2;
  double observed_order;  // NaN on the first row
  bool anomaly;           // error grew by 3x or more under refinement
};

// Repeatedly halves dx and dt, propagating psi_ref(., t_min) and measuring
// the final-time error against psi_ref. refinements >= 2 rows.
std::vector<ConvergenceRow> convergence_study(const CoefficientSet& c,
                                              const CandidateSolution& psi_ref,
                                              const GridSpec& grid, double T,
                                              const SolverConfig& cfg, int refinements);

std::vector<bool> flag_anomalies(std::span<const double> errors);

}  // namespace nls

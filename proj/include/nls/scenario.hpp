#pragma once

// Named bundles of coefficients, free functions, grid, and optional analytic
// solution or gauge; the built-in catalog; JSON and CSV serialization.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nls/constructor.hpp"
#include "nls/laxcheck.hpp"
#include "nls/similarity.hpp"
#include "nls/simulator.hpp"

namespace nls {

struct Scenario {
  std::string name;
  Params params;
  CoefficientSet coeffs;
  std::optional<PotentialGrids> v_built;  // present when v was requested as "auto"
  FreeFunctions free_fns;
  GridSpec grid;
  std::vector<double> singular_x, singular_t;
  std::optional<CandidateSolution> psi_ref;
  std::optional<GaugeSpec> gauge;
};

// The eight built-in scenarios:
//   case1    constant coefficients, v = c3 + c4 x (defaults 0)
//   case2    expulsive harmonic potential with constant gain/loss  (alpha)
//   case3    harmonic potential, exponentially growing nonlinearity (alpha)
//   case4    power-law coefficients x^{-2n}, x^n                    (n)
//   case5    generic time-only family with gamma != 0
//   hd-case1 constant effective mass with drift n/x                 (n)
//   hd-case2 power-law effective mass, q = 4p                       (p)
//   eq19     similarity-built equation with the sn exact solution
std::vector<std::string> catalog_names();
Scenario catalog(const std::string& name, const Params& overrides = {});

Scenario scenario_from_json(const std::string& json_text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario_file(const std::string& path);

struct RunReport {
  std::string command;
  std::string scenario;
  std::vector<ResidualReport> reports;
  std::vector<std::string> artifacts;
  std::map<std::string, double> metrics;
  double wall_time_s = 0;
  int exit_status = 0;  // 0 all pass, 1 a check failed, 2 usage/validation
};

// exit_status 0/1 from the pass flags; call after filling reports.
void finalize_exit_status(RunReport& r);

std::string report_to_json(const ResidualReport& r);
std::string run_report_to_json(const RunReport& r);

// Field dumps: CSV rows "x,t,re,im,abs" (17 significant digits) plus a JSON
// sidecar describing the grid.
void write_field_csv(const std::string& path, const ComplexField& f);
void write_real_field_csv(const std::string& path, const RealField& f);
void write_grid_sidecar(const std::string& path, const GridSpec& g,
                        const std::map<std::string, double>& extra = {});
void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows);

// Lax auxiliary functions as expression-string JSON:
// {"f1":{"re":...,"im":...}, ..., "lambda": number}
LaxFunctions lax_functions_from_json(const std::string& json_text);
std::string lax_functions_to_json(const LaxFunctions& L);
LaxFunctions load_lax_functions_file(const std::string& path);

}  // namespace nls

#include "nls/nls_c.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "nls/checks.hpp"
#include "nls/scenario.hpp"

using nlohmann::ordered_json;

struct nls_expr {
  nls::Expr e;
};

struct nls_scenario {
  nls::Scenario s;
};

namespace {

thread_local std::string g_last_error;

nls_status set_error(nls_status st, const std::string& msg) {
  g_last_error = msg;
  return st;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

nls::Params params_from_json_text(const char* params_json) {
  nls::Params p;
  if (!params_json || !*params_json) return p;
  const auto j = ordered_json::parse(params_json);
  for (auto it = j.begin(); it != j.end(); ++it) p[it.key()] = it.value().get<double>();
  return p;
}

// Uniform exception-to-status mapping for every entry point.
template <typename Fn>
nls_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const nls::FixpointDivergence& e) {
    return set_error(NLS_CHECK_FAILED, e.what());
  } catch (const nls::ParseError& e) {
    return set_error(NLS_INVALID, e.what());
  } catch (const nls::EvalError& e) {
    return set_error(NLS_DOMAIN_ERROR, e.what());
  } catch (const nlohmann::json::exception& e) {
    return set_error(NLS_INVALID, std::string("invalid JSON: ") + e.what());
  } catch (const std::invalid_argument& e) {
    return set_error(NLS_INVALID, e.what());
  } catch (const std::domain_error& e) {
    return set_error(NLS_INVALID, e.what());
  } catch (const std::ios_base::failure& e) {
    return set_error(NLS_IO_ERROR, e.what());
  } catch (const std::exception& e) {
    return set_error(NLS_INVALID, e.what());
  }
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(clock::now() - start_).count();
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point start_ = clock::now();
};

std::filesystem::path ensure_out_dir(const char* out_dir) {
  std::filesystem::path dir(out_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text << "\n";
}

nls_status emit_report(nls::RunReport& report, const Stopwatch& watch, const char* out_dir,
                       char** report_json) {
  report.wall_time_s = watch.seconds();
  nls::finalize_exit_status(report);
  if (out_dir) {
    const auto dir = ensure_out_dir(out_dir);
    const auto path = dir / "report.json";
    report.artifacts.push_back(path.string());
    write_text(path, nls::run_report_to_json(report));
  }
  if (report_json) *report_json = dup_string(nls::run_report_to_json(report));
  if (report.exit_status != 0)
    return set_error(NLS_CHECK_FAILED, "one or more checks failed");
  return NLS_OK;
}

double option_tol(const ordered_json& j) {
  return j.contains("tol") ? j["tol"].get<double>() : nls::kDefaultTol;
}

ordered_json parse_options(const char* options_json) {
  if (!options_json || !*options_json) return ordered_json::object();
  return ordered_json::parse(options_json);
}

}  // namespace

extern "C" {

const char* nls_version(void) { return "1.0.0"; }

const char* nls_last_error(void) { return g_last_error.c_str(); }

void nls_string_free(char* s) { std::free(s); }

nls_status nls_expr_parse(const char* source, nls_expr** out) {
  if (!source || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = new nls_expr{nls::parse_expr(source)};
    return NLS_OK;
  });
}

void nls_expr_free(nls_expr* e) { delete e; }

nls_status nls_expr_eval(const nls_expr* e, double x, double t, const char* params_json,
                         double* out) {
  if (!e || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = e->e.eval(x, t, params_from_json_text(params_json));
    return NLS_OK;
  });
}

nls_status nls_expr_diff(const nls_expr* e, const char* var, int order, nls_expr** out) {
  if (!e || !var || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    nls::Var v;
    if (std::strcmp(var, "x") == 0)
      v = nls::Var::X;
    else if (std::strcmp(var, "t") == 0)
      v = nls::Var::T;
    else
      return set_error(NLS_INVALID, "var must be \"x\" or \"t\"");
    *out = new nls_expr{e->e.diff(v, order)};
    return NLS_OK;
  });
}

nls_status nls_expr_simplify(const nls_expr* e, nls_expr** out) {
  if (!e || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = new nls_expr{e->e.simplified()};
    return NLS_OK;
  });
}

nls_status nls_expr_to_string(const nls_expr* e, char** out) {
  if (!e || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = dup_string(e->e.str());
    return NLS_OK;
  });
}

nls_status nls_scenario_from_file(const char* path, nls_scenario** out) {
  if (!path || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = new nls_scenario{nls::load_scenario_file(path)};
    return NLS_OK;
  });
}

nls_status nls_scenario_from_json(const char* json_text, nls_scenario** out) {
  if (!json_text || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = new nls_scenario{nls::scenario_from_json(json_text)};
    return NLS_OK;
  });
}

nls_status nls_scenario_from_catalog(const char* name, const char* params_json,
                                     nls_scenario** out) {
  if (!name || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = new nls_scenario{nls::catalog(name, params_from_json_text(params_json))};
    return NLS_OK;
  });
}

void nls_scenario_free(nls_scenario* s) { delete s; }

nls_status nls_scenario_to_json(const nls_scenario* s, char** out) {
  if (!s || !out) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    *out = dup_string(nls::scenario_to_json(s->s));
    return NLS_OK;
  });
}

nls_status nls_catalog_list(char** names_json) {
  if (!names_json) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    ordered_json j = nls::catalog_names();
    *names_json = dup_string(j.dump());
    return NLS_OK;
  });
}

nls_status nls_run_check(const nls_scenario* s, const char* options_json, const char* out_dir,
                         char** report_json) {
  if (!s) return set_error(NLS_INVALID, "null scenario");
  return guarded([&] {
    const Stopwatch watch;
    const auto opts = parse_options(options_json);
    const double tol = option_tol(opts);
    nls::RunReport report;
    report.command = "check";
    report.scenario = s->s.name;
    for (const auto& r : nls::scenario_check(s->s, tol)) report.reports.push_back(r.report);
    return emit_report(report, watch, out_dir, report_json);
  });
}

nls_status nls_run_construct(const char* request_json, const char* out_dir,
                             char** report_json) {
  if (!request_json) return set_error(NLS_INVALID, "null request");
  return guarded([&] {
    const Stopwatch watch;
    const auto req = ordered_json::parse(request_json);
    for (const char* key : {"g", "c1", "c2", "grid"})
      if (!req.contains(key))
        return set_error(NLS_INVALID, std::string("construct: missing '") + key + "'");

    ordered_json scenario_json;
    scenario_json["name"] = req.value("name", "constructed");
    scenario_json["params"] = req.value("params", ordered_json::object());
    scenario_json["coefficients"] = {{"f", "auto"}, {"g", req["g"].get<std::string>()},
                                     {"gamma", "auto"}, {"v", "auto"}};
    ordered_json free_fns = {{"c1", req["c1"].get<std::string>()},
                             {"c2", req["c2"].get<std::string>()}};
    if (req.contains("c3")) free_fns["c3"] = req["c3"].get<std::string>();
    if (req.contains("c4")) free_fns["c4"] = req["c4"].get<std::string>();
    scenario_json["free"] = free_fns;
    scenario_json["grid"] = req["grid"];
    const nls::Scenario scn = nls::scenario_from_json(scenario_json.dump());

    const double tol = req.contains("tol") ? req["tol"].get<double>() : nls::kQuadratureTol;
    nls::RunReport report;
    report.command = "construct";
    report.scenario = scn.name;
    for (const auto& r : nls::scenario_check(scn, tol)) report.reports.push_back(r.report);

    if (out_dir) {
      const auto dir = ensure_out_dir(out_dir);
      const auto scn_path = dir / "scenario.json";
      write_text(scn_path, nls::scenario_to_json(scn));
      report.artifacts.push_back(scn_path.string());
      const auto v_path = dir / "v.csv";
      nls::write_real_field_csv(v_path.string(), scn.v_built->v);
      report.artifacts.push_back(v_path.string());
      nls::write_grid_sidecar((dir / "v.json").string(), scn.grid);
      report.artifacts.push_back((dir / "v.json").string());
    }

    report.wall_time_s = watch.seconds();
    nls::finalize_exit_status(report);
    if (out_dir)
      write_text(ensure_out_dir(out_dir) / "report.json", nls::run_report_to_json(report));
    if (report_json) *report_json = dup_string(nls::run_report_to_json(report));
    if (report.exit_status != 0)
      return set_error(NLS_CHECK_FAILED,
                       "constructed scenario failed its self-check; the quadrature "
                       "resolution is likely too coarse, increase n_x");
    return NLS_OK;
  });
}

nls_status nls_run_map(const nls_scenario* s, const char* q_json, const char* out_dir,
                       char** report_json) {
  if (!s) return set_error(NLS_INVALID, "null scenario");
  return guarded([&] {
    const Stopwatch watch;
    if (!s->s.gauge) return set_error(NLS_INVALID, "map: scenario has no gauge block");
    const auto opts = parse_options(q_json);
    const double tol = option_tol(opts);

    nls::Expr q_re = nls::q_sn_profile();
    nls::Expr q_im = nls::Expr::constant(0.0);
    if (opts.contains("re")) q_re = nls::parse_expr(opts["re"].get<std::string>());
    if (opts.contains("im")) q_im = nls::parse_expr(opts["im"].get<std::string>());
    if (opts.contains("q")) {
      const std::string name = opts["q"].get<std::string>();
      if (name != "sn") return set_error(NLS_INVALID, "map: unknown profile '" + name + "'");
      q_re = nls::q_sn_profile();
      q_im = nls::Expr::constant(0.0);
    }

    nls::GaugeSpec gs = *s->s.gauge;
    for (const auto& [k, v] : s->s.params) gs.params[k] = v;
    const auto psi = nls::map_solution(gs, s->s.coeffs.f, q_re, q_im, s->s.grid);

    nls::RunReport report;
    report.command = "map";
    report.scenario = s->s.name;

    // homogeneous-profile residual over the realized X-range
    {
      const auto X = nls::compute_X(gs, s->s.grid);
      double lo = X.data[0], hi = X.data[0];
      for (double v : X.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      report.reports.push_back(
          nls::check_homogeneous(q_re, q_im, gs.epsilon, gs.delta, lo, hi, 512, tol).report);
    }

    nls::CoefficientSet c = s->s.coeffs;
    c.params = s->s.params;
    if (s->s.psi_ref) {
      report.reports.push_back(
          nls::residual_of_candidate(c, *s->s.psi_ref, s->s.grid, tol).report);
      double worst = 0;
      for (int j = 0; j < s->s.grid.n_t; ++j) {
        const auto ref = nls::sample_candidate(*s->s.psi_ref, c, s->s.grid, s->s.grid.t(j));
        for (int i = 0; i < s->s.grid.n_x; ++i)
          worst = std::max(worst, std::abs(psi.at(i, j) - ref[i]));
      }
      report.metrics["map_vs_ref_linf"] = worst;
    }

    if (out_dir) {
      const auto dir = ensure_out_dir(out_dir);
      nls::write_field_csv((dir / "psi.csv").string(), psi);
      report.artifacts.push_back((dir / "psi.csv").string());
      nls::write_grid_sidecar((dir / "psi.json").string(), psi.grid);
      report.artifacts.push_back((dir / "psi.json").string());
    }
    return emit_report(report, watch, out_dir, report_json);
  });
}

nls_status nls_run_lax(const nls_scenario* s, const char* laxfns_json, const char* out_dir,
                       char** report_json) {
  if (!s || !laxfns_json) return set_error(NLS_INVALID, "null argument");
  return guarded([&] {
    const Stopwatch watch;
    const auto opts = ordered_json::parse(laxfns_json);
    const double tol = option_tol(opts);
    nls::LaxFunctions L;
    if (opts.contains("akns"))
      L = nls::akns_case1(opts["akns"].get<double>());
    else
      L = nls::lax_functions_from_json(laxfns_json);

    nls::CoefficientSet c = s->s.coeffs;
    c.params = s->s.params;
    nls::RunReport report;
    report.command = "lax";
    report.scenario = s->s.name;
    for (const auto& r : nls::compat_residuals(L, c, s->s.grid, tol))
      report.reports.push_back(r.report);
    return emit_report(report, watch, out_dir, report_json);
  });
}

nls_status nls_run_simulate(const nls_scenario* s, const char* options_json,
                            const char* out_dir, char** report_json) {
  if (!s) return set_error(NLS_INVALID, "null scenario");
  return guarded([&] {
    const Stopwatch watch;
    const auto opts = parse_options(options_json);
    for (const char* key : {"dt", "T"})
      if (!opts.contains(key))
        return set_error(NLS_INVALID, std::string("simulate: missing '") + key + "'");

    nls::SolverConfig cfg;
    cfg.dt = opts["dt"].get<double>();
    const double T = opts["T"].get<double>();
    const std::string boundary = opts.value("boundary", "zero");
    if (boundary == "analytic")
      cfg.boundary = nls::SolverConfig::Boundary::AnalyticDirichlet;
    else if (boundary != "zero")
      return set_error(NLS_INVALID, "simulate: boundary must be \"zero\" or \"analytic\"");

    nls::CoefficientSet c = s->s.coeffs;
    c.params = s->s.params;

    nls::GridSpec grid = s->s.grid;
    if (opts.contains("n_x"))
      grid = nls::GridSpec::make(grid.x_min, grid.x_max, opts["n_x"].get<int>(), grid.t_min,
                                 grid.t_max, grid.n_t, s->s.singular_x, s->s.singular_t);

    std::optional<nls::CandidateSolution> psi0_expr;
    if (opts.contains("psi0")) {
      psi0_expr = nls::CandidateSolution{
          nls::parse_expr(opts["psi0"]["re"].get<std::string>()),
          nls::parse_expr(opts["psi0"]["im"].get<std::string>())};
    } else if (s->s.psi_ref) {
      psi0_expr = s->s.psi_ref;
    } else {
      return set_error(NLS_INVALID,
                       "simulate: no psi0 given and the scenario has no analytic solution");
    }
    const auto psi0 = nls::sample_candidate(*psi0_expr, c, grid, grid.t_min);

    const auto run = nls::propagate(c, psi0, grid, T, cfg, s->s.psi_ref);

    nls::RunReport report;
    report.command = "simulate";
    report.scenario = s->s.name;
    report.metrics["worst_iterations"] = run.worst_iterations;
    report.metrics["worst_delta"] = run.worst_delta;
    const auto& og = run.psi.grid;
    std::vector<std::complex<double>> last(og.n_x);
    for (int i = 0; i < og.n_x; ++i) last[i] = run.psi.at(i, og.n_t - 1);
    report.metrics["l2_initial"] = nls::l2_norm(psi0, og.dx());
    report.metrics["l2_final"] = nls::l2_norm(last, og.dx());
    if (s->s.psi_ref) {
      const auto ref = nls::sample_candidate(*s->s.psi_ref, c, grid, og.t_max);
      report.metrics["linf_error_vs_ref"] = nls::linf_diff(last, ref);
    }

    if (out_dir) {
      const auto dir = ensure_out_dir(out_dir);
      nls::write_field_csv((dir / "psi.csv").string(), run.psi);
      report.artifacts.push_back((dir / "psi.csv").string());
      nls::write_grid_sidecar((dir / "psi.json").string(), og,
                              {{"dt", cfg.dt}, {"T", T}});
      report.artifacts.push_back((dir / "psi.json").string());
    }

    if (opts.contains("refinements")) {
      if (!s->s.psi_ref)
        return set_error(NLS_INVALID,
                         "simulate: a convergence study needs an analytic solution");
      const auto rows = nls::convergence_study(c, *s->s.psi_ref, grid, T, cfg,
                                               opts["refinements"].get<int>());
      for (std::size_t k = 1; k < rows.size(); ++k)
        report.metrics["observed_order_" + std::to_string(k)] = rows[k].observed_order;
      if (out_dir) {
        const auto dir = ensure_out_dir(out_dir);
        nls::write_convergence_csv((dir / "convergence.csv").string(), rows);
        report.artifacts.push_back((dir / "convergence.csv").string());
      }
    }

    if (opts.contains("max_error") && s->s.psi_ref &&
        report.metrics["linf_error_vs_ref"] > opts["max_error"].get<double>()) {
      report.wall_time_s = watch.seconds();
      report.exit_status = 1;
      if (out_dir)
        write_text(ensure_out_dir(out_dir) / "report.json", nls::run_report_to_json(report));
      if (report_json) *report_json = dup_string(nls::run_report_to_json(report));
      return set_error(NLS_CHECK_FAILED, "simulate: error against the reference exceeds gate");
    }
    return emit_report(report, watch, out_dir, report_json);
  });
}

}  // extern "C"

// Command-line front end for the toolkit. Talks to the shared library
// exclusively through the C API; flag handling and request JSON assembly
// happen here.

#include <algorithm>
#include <array>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nls/nls_c.h"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

int status_to_exit(nls_status st) {
  switch (st) {
    case NLS_OK: return 0;
    case NLS_CHECK_FAILED: return 1;
    default: return 2;
  }
}

int fail(nls_status st) {
  std::cerr << "error: " << nls_last_error() << "\n";
  return status_to_exit(st);
}

struct StringOut {
  char* ptr = nullptr;
  ~StringOut() { nls_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

struct ScenarioHandle {
  nls_scenario* ptr = nullptr;
  ~ScenarioHandle() { nls_scenario_free(ptr); }
};

json parse_kv_params(const std::vector<std::string>& kvs) {
  json out = json::object();
  for (const auto& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--param", "expected name=value, got '" + kv + "'");
    try {
      out[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--param", "value in '" + kv + "' is not a number");
    }
  }
  return out;
}

// "x_min:x_max:n_x,t_min:t_max:n_t"
json parse_grid_spec(const std::string& spec) {
  const auto comma = spec.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("--grid", "expected x_min:x_max:n_x,t_min:t_max:n_t");
  auto split3 = [](const std::string& s) {
    const auto a = s.find(':');
    const auto b = s.find(':', a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw CLI::ValidationError("--grid", "expected three ':'-separated values");
    return std::array<std::string, 3>{s.substr(0, a), s.substr(a + 1, b - a - 1),
                                      s.substr(b + 1)};
  };
  const auto xs = split3(spec.substr(0, comma));
  const auto ts = split3(spec.substr(comma + 1));
  return json{{"x_min", std::stod(xs[0])}, {"x_max", std::stod(xs[1])},
              {"n_x", std::stoi(xs[2])},   {"t_min", std::stod(ts[0])},
              {"t_max", std::stod(ts[1])}, {"n_t", std::stoi(ts[2])}};
}

double default_tol() {
  if (const char* env = std::getenv("NLS_TOL")) {
    try {
      return std::stod(env);
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring malformed NLS_TOL\n";
    }
  }
  return 1e-8;
}

// Loads --scenario FILE or --catalog NAME, applying --param and --set-coeff
// overrides by editing the scenario JSON.
nls_status load_scenario(const std::string& file, const std::string& cat,
                         const std::vector<std::string>& params,
                         const std::vector<std::string>& set_coeffs, ScenarioHandle& out) {
  nls_status st;
  ScenarioHandle base;
  if (!file.empty())
    st = nls_scenario_from_file(file.c_str(), &base.ptr);
  else
    st = nls_scenario_from_catalog(cat.c_str(), parse_kv_params(params).dump().c_str(),
                                   &base.ptr);
  if (st != NLS_OK) return st;

  const bool param_edit = !file.empty() && !params.empty();
  if (set_coeffs.empty() && !param_edit) {
    out.ptr = base.ptr;
    base.ptr = nullptr;
    return NLS_OK;
  }

  StringOut text;
  st = nls_scenario_to_json(base.ptr, &text.ptr);
  if (st != NLS_OK) return st;
  ordered_json j = ordered_json::parse(text.str());
  if (param_edit)
    for (const auto& [k, v] : parse_kv_params(params).items()) j["params"][k] = v;
  for (const auto& kv : set_coeffs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--set-coeff", "expected name=expression");
    j["coefficients"][kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return nls_scenario_from_json(j.dump().c_str(), &out.ptr);
}

int run_one_check(const std::string& file, const std::string& cat,
                  const std::vector<std::string>& params,
                  const std::vector<std::string>& set_coeffs, double tol,
                  const std::string& out_dir, bool print) {
  ScenarioHandle s;
  nls_status st = load_scenario(file, cat, params, set_coeffs, s);
  if (st != NLS_OK) return fail(st);
  const json opts{{"tol", tol}};
  StringOut report;
  st = nls_run_check(s.ptr, opts.dump().c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                     &report.ptr);
  if (st != NLS_OK && st != NLS_CHECK_FAILED) return fail(st);
  if (print) std::cout << report.str() << "\n";
  return status_to_exit(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nonautonomous NLS integrability toolkit"};
  app.require_subcommand(1);

  std::string scenario_file, catalog_name, out_dir, grid_spec, gauge_arg, q_arg, laxfns_file;
  std::string boundary = "zero", psi0_re, psi0_im;
  std::vector<std::string> params, set_coeffs;
  double tol = default_tol();
  double dt = 1e-3, horizon = 1.0, lambda = 1.0, max_error = -1;
  int jobs = 1;
  bool list_catalog = false, use_akns = false;

  auto* check = app.add_subcommand("check", "run the integrability residual checks");
  check->add_option("--scenario", scenario_file, "scenario JSON file");
  check->add_option("--catalog", catalog_name, "catalog scenario name, or 'all'");
  check->add_option("--param", params, "override parameter name=value")->take_all();
  check->add_option("--set-coeff", set_coeffs, "override coefficient name=expression")
      ->take_all();
  check->add_option("--tol", tol, "pass tolerance (default 1e-8 or NLS_TOL)");
  check->add_option("--out", out_dir, "directory for report.json");
  check->add_option("--jobs", jobs, "parallel catalog checks (with --catalog all)");

  auto* construct = app.add_subcommand("construct", "build an integrable equation from g");
  std::string g_expr, c1_expr = "1", c2_expr = "1", c3_expr, c4_expr;
  construct->add_option("--g", g_expr, "seed nonlinearity g(x,t)")->required();
  construct->add_option("--c1", c1_expr, "free function c1(t)");
  construct->add_option("--c2", c2_expr, "free function c2(t)");
  construct->add_option("--c3", c3_expr, "free function c3(t)");
  construct->add_option("--c4", c4_expr, "free function c4(t)");
  construct->add_option("--grid", grid_spec, "x_min:x_max:n_x,t_min:t_max:n_t")->required();
  construct->add_option("--param", params, "parameter name=value")->take_all();
  construct->add_option("--tol", tol, "self-check tolerance (default 1e-6)");
  construct->add_option("--out", out_dir, "output directory");

  auto* map_cmd = app.add_subcommand("map", "map a homogeneous profile through a gauge");
  map_cmd->add_option("--gauge", gauge_arg, "gauge scenario file or catalog name")->required();
  map_cmd->add_option("--Q", q_arg, "profile: 'sn' or an expression in the X coordinate");
  map_cmd->add_option("--param", params, "override parameter name=value")->take_all();
  map_cmd->add_option("--tol", tol, "pass tolerance");
  map_cmd->add_option("--out", out_dir, "output directory");

  auto* lax = app.add_subcommand("lax", "evaluate Lax compatibility residuals");
  lax->add_option("--scenario", scenario_file, "scenario JSON file");
  lax->add_option("--catalog", catalog_name, "catalog scenario name");
  lax->add_option("--laxfns", laxfns_file, "auxiliary functions JSON file");
  lax->add_flag("--akns", use_akns, "use the built-in constant-coefficient instance");
  lax->add_option("--lambda", lambda, "spectral parameter for --akns");
  lax->add_option("--param", params, "override parameter name=value")->take_all();
  lax->add_option("--tol", tol, "pass tolerance");
  lax->add_option("--out", out_dir, "output directory");

  auto* simulate = app.add_subcommand("simulate", "propagate a scenario in time");
  simulate->add_option("--scenario", scenario_file, "scenario JSON file");
  simulate->add_option("--catalog", catalog_name, "catalog scenario name");
  simulate->add_option("--dt", dt, "time step")->required();
  simulate->add_option("--T", horizon, "propagation time")->required();
  simulate->add_option("--boundary", boundary, "zero | analytic");
  simulate->add_option("--psi0-re", psi0_re, "initial data, real part expression");
  simulate->add_option("--psi0-im", psi0_im, "initial data, imaginary part expression");
  simulate->add_option("--max-error", max_error, "fail if the error vs psi_ref exceeds this");
  int refinements = 0, nx_override = 0;
  simulate->add_option("--refinements", refinements,
                       "also run a dx,dt-halving convergence study (>= 2 levels)");
  simulate->add_option("--nx", nx_override, "resample the x-grid to this many points");
  simulate->add_option("--param", params, "override parameter name=value")->take_all();
  simulate->add_option("--out", out_dir, "output directory");

  auto* cat = app.add_subcommand("catalog", "list or print built-in scenarios");
  cat->add_flag("--list", list_catalog, "list scenario names");
  std::string cat_name;
  cat->add_option("name", cat_name, "scenario to print");
  cat->add_option("--param", params, "parameter name=value")->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(check)) {
      if (scenario_file.empty() == catalog_name.empty()) {
        std::cerr << "error: need exactly one of --scenario or --catalog\n";
        return 2;
      }
      if (catalog_name == "all") {
        StringOut names_json;
        if (nls_status st = nls_catalog_list(&names_json.ptr); st != NLS_OK) return fail(st);
        const auto names = json::parse(names_json.str());
        std::vector<std::future<int>> futures;
        std::vector<std::string> todo(names.begin(), names.end());
        int worst = 0;
        for (std::size_t begin = 0; begin < todo.size();
             begin += static_cast<std::size_t>(std::max(1, jobs))) {
          futures.clear();
          const std::size_t end =
              std::min(todo.size(), begin + static_cast<std::size_t>(std::max(1, jobs)));
          for (std::size_t k = begin; k < end; ++k) {
            const std::string name = todo[k];
            const std::string dir = out_dir.empty() ? "" : out_dir + "/" + name;
            futures.push_back(std::async(std::launch::async, [=] {
              return run_one_check("", name, params, set_coeffs, tol, dir, false);
            }));
          }
          for (auto& f : futures) worst = std::max(worst, f.get());
        }
        std::cout << (worst == 0 ? "all catalog scenarios pass\n"
                                 : "catalog check failures detected\n");
        return worst;
      }
      return run_one_check(scenario_file, catalog_name, params, set_coeffs, tol, out_dir,
                           true);
    }

    if (app.got_subcommand(construct)) {
      json req{{"g", g_expr}, {"c1", c1_expr}, {"c2", c2_expr},
               {"grid", parse_grid_spec(grid_spec)}};
      if (!c3_expr.empty()) req["c3"] = c3_expr;
      if (!c4_expr.empty()) req["c4"] = c4_expr;
      if (!params.empty()) req["params"] = parse_kv_params(params);
      if (construct->count("--tol")) req["tol"] = tol;
      StringOut report;
      const nls_status st = nls_run_construct(
          req.dump().c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &report.ptr);
      if (st != NLS_OK && st != NLS_CHECK_FAILED) return fail(st);
      std::cout << report.str() << "\n";
      if (st == NLS_CHECK_FAILED) std::cerr << "error: " << nls_last_error() << "\n";
      return status_to_exit(st);
    }

    if (app.got_subcommand(map_cmd)) {
      ScenarioHandle s;
      nls_status st;
      if (gauge_arg.find(".json") != std::string::npos)
        st = nls_scenario_from_file(gauge_arg.c_str(), &s.ptr);
      else
        st = nls_scenario_from_catalog(gauge_arg.c_str(),
                                       parse_kv_params(params).dump().c_str(), &s.ptr);
      if (st != NLS_OK) return fail(st);
      json q{{"tol", tol}};
      if (q_arg.empty() || q_arg == "sn")
        q["q"] = "sn";
      else
        q["re"] = q_arg;
      StringOut report;
      st = nls_run_map(s.ptr, q.dump().c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                       &report.ptr);
      if (st != NLS_OK && st != NLS_CHECK_FAILED) return fail(st);
      std::cout << report.str() << "\n";
      return status_to_exit(st);
    }

    if (app.got_subcommand(lax)) {
      if (scenario_file.empty() == catalog_name.empty()) {
        std::cerr << "error: need exactly one of --scenario or --catalog\n";
        return 2;
      }
      ScenarioHandle s;
      nls_status st = load_scenario(scenario_file, catalog_name, params, {}, s);
      if (st != NLS_OK) return fail(st);
      std::string lax_json;
      if (use_akns) {
        lax_json = json{{"akns", lambda}, {"tol", tol}}.dump();
      } else if (!laxfns_file.empty()) {
        std::ifstream in(laxfns_file);
        if (!in) {
          std::cerr << "error: cannot open '" << laxfns_file << "'\n";
          return 2;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        lax_json = ss.str();
      } else {
        std::cerr << "error: need --laxfns FILE or --akns\n";
        return 2;
      }
      StringOut report;
      st = nls_run_lax(s.ptr, lax_json.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(),
                       &report.ptr);
      if (st != NLS_OK && st != NLS_CHECK_FAILED) return fail(st);
      std::cout << report.str() << "\n";
      return status_to_exit(st);
    }

    if (app.got_subcommand(simulate)) {
      if (scenario_file.empty() == catalog_name.empty()) {
        std::cerr << "error: need exactly one of --scenario or --catalog\n";
        return 2;
      }
      ScenarioHandle s;
      nls_status st = load_scenario(scenario_file, catalog_name, params, {}, s);
      if (st != NLS_OK) return fail(st);
      json opts{{"dt", dt}, {"T", horizon}, {"boundary", boundary}};
      if (!psi0_re.empty() || !psi0_im.empty())
        opts["psi0"] = {{"re", psi0_re.empty() ? "0" : psi0_re},
                        {"im", psi0_im.empty() ? "0" : psi0_im}};
      if (max_error >= 0) opts["max_error"] = max_error;
      if (refinements > 0) opts["refinements"] = refinements;
      if (nx_override > 0) opts["n_x"] = nx_override;
      StringOut report;
      st = nls_run_simulate(s.ptr, opts.dump().c_str(),
                            out_dir.empty() ? nullptr : out_dir.c_str(), &report.ptr);
      if (st != NLS_OK && st != NLS_CHECK_FAILED) return fail(st);
      std::cout << report.str() << "\n";
      return status_to_exit(st);
    }

    if (app.got_subcommand(cat)) {
      if (list_catalog) {
        StringOut names_json;
        if (nls_status st = nls_catalog_list(&names_json.ptr); st != NLS_OK) return fail(st);
        for (const auto& n : json::parse(names_json.str()))
          std::cout << n.get<std::string>() << "\n";
        return 0;
      }
      if (cat_name.empty()) {
        std::cerr << "error: need --list or a scenario name\n";
        return 2;
      }
      ScenarioHandle s;
      nls_status st = nls_scenario_from_catalog(
          cat_name.c_str(), parse_kv_params(params).dump().c_str(), &s.ptr);
      if (st != NLS_OK) return fail(st);
      StringOut text;
      st = nls_scenario_to_json(s.ptr, &text.ptr);
      if (st != NLS_OK) return fail(st);
      std::cout << text.str() << "\n";
      return 0;
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

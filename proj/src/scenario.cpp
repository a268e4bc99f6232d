#include "nls/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace nls {

using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Catalog

std::vector<std::string> catalog_names() {
  return {"case1", "case2", "case3", "case4", "case5", "hd-case1", "hd-case2", "eq19"};
}

namespace {

Params with_defaults(const Params& overrides, const Params& defaults) {
  Params p = defaults;
  for (const auto& [k, v] : overrides) p[k] = v;
  return p;
}

Scenario make_case1(const Params& overrides) {
  Scenario s;
  s.name = "case1";
  s.params = overrides;
  s.grid = GridSpec::make(-20, 20, 401, 0, 1, 101);
  s.coeffs.v = (s.free_fns.c3 + s.free_fns.c4 * Expr::x()).simplified();
  s.psi_ref = CandidateSolution{parse_expr("sqrt(2)*sech(x)*cos(t)"),
                                parse_expr("sqrt(2)*sech(x)*sin(t)")};
  return s;
}

Scenario make_case2(const Params& overrides) {
  Scenario s;
  s.name = "case2";
  s.params = with_defaults(overrides, {{"alpha", 0.5}});
  s.grid = GridSpec::make(-10, 10, 401, 0, 1, 101);
  s.coeffs.gamma = parse_expr("-alpha/2");
  s.coeffs.v = parse_expr("alpha^2*x^2/4");
  s.free_fns.c2 = parse_expr("exp(alpha*t)");
  return s;
}

Scenario make_case3(const Params& overrides) {
  Scenario s;
  s.name = "case3";
  s.params = with_defaults(overrides, {{"alpha", 0.5}});
  s.grid = GridSpec::make(-10, 10, 401, 0, 1, 101);
  s.coeffs.g = parse_expr("exp(alpha*t)");
  s.coeffs.v = parse_expr("alpha^2*x^2/4");
  s.free_fns.c1 = parse_expr("exp(2*alpha*t)");
  s.free_fns.c2 = parse_expr("exp(2*alpha*t)");
  return s;
}

Scenario make_case4(const Params& overrides) {
  Scenario s;
  s.name = "case4";
  s.params = with_defaults(overrides, {{"n", 1.0}});
  s.singular_x = {0.0};
  s.grid = GridSpec::make(0.5, 3, 401, 0, 1, 101, s.singular_x);
  s.coeffs.f = parse_expr("x^(-2*n)");
  s.coeffs.g = parse_expr("x^n");
  s.coeffs.v = parse_expr("-(1/4)*n*(n+2)*x^(-2*(n+1))");
  return s;
}

Scenario make_case5(const Params& overrides) {
  Scenario s;
  s.name = "case5";
  s.params = overrides;
  s.grid = GridSpec::make(-5, 5, 401, 0, 2, 101);
  s.coeffs.f = parse_expr("exp(-t/4)");
  s.coeffs.g = parse_expr("1 + sin(t)/2");
  s.coeffs.gamma = parse_expr("(cos(t)/2)/(1 + sin(t)/2)");
  s.free_fns.c1 = parse_expr("exp(-t/4)*(1 + sin(t)/2)^2");
  s.coeffs.v = build_v_timeonly(s.coeffs.f, s.coeffs.g, s.coeffs.gamma, s.free_fns);
  return s;
}

Scenario make_hd_case1(const Params& overrides) {
  Scenario s;
  s.name = "hd-case1";
  s.params = with_defaults(overrides, {{"n", 1.0}});
  s.singular_x = {0.0};
  s.grid = GridSpec::make(1, 3, 401, 0, 1, 101, s.singular_x);
  s.coeffs.g = parse_expr("x^n");
  s.coeffs.h = parse_expr("n/x");
  s.coeffs.v = parse_expr("n*(n-2)/(4*x^2)");
  // f g^2 = c1 H with H normalized at x_min = 1
  s.free_fns.c1 = parse_expr("1^(2*n)");
  return s;
}

Scenario make_hd_case2(const Params& overrides) {
  Scenario s;
  s.name = "hd-case2";
  s.params = with_defaults(overrides, {{"p", 1.0}});
  const double p = s.params.at("p");
  if (std::fabs(p - 0.5) < 1e-12)
    throw std::invalid_argument("hd-case2: p = 1/2 degenerates the x^{1-p} kernel term");
  s.singular_x = {0.0};
  s.grid = GridSpec::make(0.5, 3, 401, 0, 1, 101, s.singular_x);
  s.coeffs.f = parse_expr("x^(2*p)");
  s.coeffs.h = parse_expr("2*p*x^(2*p-1)");
  s.coeffs.g = parse_expr("x^p");
  s.coeffs.v = parse_expr("-(1/4)*p*(2-3*p)*x^(2*(p-1))");
  s.free_fns.c1 = parse_expr("0.5^(4*p)");  // f g^2 = c1 H, H pinned at x_min = 0.5
  return s;
}

Scenario make_eq19(const Params& overrides) {
  Scenario s;
  s.name = "eq19";
  s.singular_x = {0.0};
  s.singular_t = {0.0};
  s.grid = GridSpec::make(0.7, 3, 401, 0.5, 2, 101, s.singular_x, s.singular_t);
  // xm is the quadrature base point the gauge functions are pinned to
  s.params = with_defaults(overrides, {{"xm", s.grid.x_min}});
  s.coeffs.g = parse_expr("t^2*x^3");
  s.coeffs.v = parse_expr("3*x^2/(16*t^2) - 3/(4*x^2)");
  s.gauge = gauge_eq19(s.grid);
  s.psi_ref = CandidateSolution{parse_expr("cos(x^2/(8*t))*sn(t*x^2/sqrt(8), -1)/sqrt(x)"),
                                parse_expr("-sin(x^2/(8*t))*sn(t*x^2/sqrt(8), -1)/sqrt(x)")};
  return s;
}

}  // namespace

Scenario catalog(const std::string& name, const Params& overrides) {
  if (name == "case1") return make_case1(overrides);
  if (name == "case2") return make_case2(overrides);
  if (name == "case3") return make_case3(overrides);
  if (name == "case4") return make_case4(overrides);
  if (name == "case5") return make_case5(overrides);
  if (name == "hd-case1") return make_hd_case1(overrides);
  if (name == "hd-case2") return make_hd_case2(overrides);
  if (name == "eq19") return make_eq19(overrides);
  throw std::invalid_argument("unknown catalog scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

Expr expr_from_json(const ordered_json& j, const char* what) {
  if (!j.is_string())
    throw std::invalid_argument(std::string("scenario: '") + what +
                                "' must be an expression string");
  try {
    return parse_expr(j.get<std::string>());
  } catch (const ParseError& e) {
    throw std::invalid_argument(std::string("scenario: bad expression for '") + what +
                                "': " + e.what());
  }
}

Params params_from_json(const ordered_json& j) {
  Params p;
  if (j.is_null()) return p;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number())
      throw std::invalid_argument("scenario: parameter '" + it.key() + "' must be a number");
    p[it.key()] = it.value().get<double>();
  }
  return p;
}

GridSpec grid_from_json(const ordered_json& j, std::span<const double> sx,
                        std::span<const double> st) {
  for (const char* k : {"x_min", "x_max", "n_x", "t_min", "t_max", "n_t"})
    if (!j.contains(k)) throw std::invalid_argument(std::string("scenario: grid missing ") + k);
  return GridSpec::make(j["x_min"].get<double>(), j["x_max"].get<double>(),
                        j["n_x"].get<int>(), j["t_min"].get<double>(),
                        j["t_max"].get<double>(), j["n_t"].get<int>(), sx, st);
}

ordered_json grid_to_json_obj(const GridSpec& g) {
  return ordered_json{{"x_min", g.x_min}, {"x_max", g.x_max}, {"n_x", g.n_x},
                      {"t_min", g.t_min}, {"t_max", g.t_max}, {"n_t", g.n_t}};
}

}  // namespace

Scenario scenario_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
  }

  Scenario s;
  s.name = j.value("name", "unnamed");
  if (j.contains("params")) s.params = params_from_json(j["params"]);
  if (j.contains("singular")) {
    for (const auto& v : j["singular"].value("x", ordered_json::array()))
      s.singular_x.push_back(v.get<double>());
    for (const auto& v : j["singular"].value("t", ordered_json::array()))
      s.singular_t.push_back(v.get<double>());
  }
  if (!j.contains("grid")) throw std::invalid_argument("scenario: missing grid");
  s.grid = grid_from_json(j["grid"], s.singular_x, s.singular_t);

  if (j.contains("free")) {
    const auto& fr = j["free"];
    if (fr.contains("c1")) s.free_fns.c1 = expr_from_json(fr["c1"], "free.c1");
    if (fr.contains("c2")) s.free_fns.c2 = expr_from_json(fr["c2"], "free.c2");
    if (fr.contains("c3")) s.free_fns.c3 = expr_from_json(fr["c3"], "free.c3");
    if (fr.contains("c4")) s.free_fns.c4 = expr_from_json(fr["c4"], "free.c4");
    if (fr.contains("k1i")) s.free_fns.k1i = expr_from_json(fr["k1i"], "free.k1i");
  }

  if (!j.contains("coefficients"))
    throw std::invalid_argument("scenario: missing coefficients");
  const auto& co = j["coefficients"];
  const bool f_auto = co.contains("f") && co["f"].is_string() && co["f"] == "auto";
  const bool gamma_auto =
      co.contains("gamma") && co["gamma"].is_string() && co["gamma"] == "auto";
  const bool v_auto = co.contains("v") && co["v"].is_string() && co["v"] == "auto";
  if (!co.contains("g")) throw std::invalid_argument("scenario: coefficients need g");
  s.coeffs.g = expr_from_json(co["g"], "g");
  s.coeffs.f = f_auto ? build_f(s.coeffs.g, s.free_fns.c1)
                      : (co.contains("f") ? expr_from_json(co["f"], "f") : Expr::constant(1.0));
  s.coeffs.gamma = gamma_auto ? build_gamma(s.coeffs.g, s.free_fns.c2)
                              : (co.contains("gamma") ? expr_from_json(co["gamma"], "gamma")
                                                      : Expr::constant(0.0));
  if (co.contains("h") && !co["h"].is_null()) s.coeffs.h = expr_from_json(co["h"], "h");
  s.coeffs.params = s.params;

  if (v_auto) {
    s.v_built = build_v(s.coeffs.f, s.coeffs.g, s.coeffs.gamma, s.free_fns, s.grid, s.params);
    s.coeffs.v = s.v_built->closed_form ? *s.v_built->closed_form : Expr::constant(0.0);
  } else if (co.contains("v")) {
    s.coeffs.v = expr_from_json(co["v"], "v");
  }

  if (j.contains("psi_ref") && !j["psi_ref"].is_null()) {
    const auto& pr = j["psi_ref"];
    if (pr.contains("re") && pr.contains("im")) {
      s.psi_ref = CandidateSolution{expr_from_json(pr["re"], "psi_ref.re"),
                                    expr_from_json(pr["im"], "psi_ref.im")};
    } else if (pr.contains("abs") && pr.contains("phase")) {
      const Expr amp = expr_from_json(pr["abs"], "psi_ref.abs");
      const Expr ph = expr_from_json(pr["phase"], "psi_ref.phase");
      s.psi_ref = CandidateSolution{(amp * Expr::call(Builtin::Cos, {ph})).simplified(),
                                    (amp * Expr::call(Builtin::Sin, {ph})).simplified()};
    } else {
      throw std::invalid_argument("scenario: psi_ref needs {re,im} or {abs,phase}");
    }
  }

  if (j.contains("gauge") && !j["gauge"].is_null()) {
    const auto& ga = j["gauge"];
    GaugeSpec gs;
    if (ga.contains("beta")) gs.beta = expr_from_json(ga["beta"], "gauge.beta");
    if (ga.contains("gamma")) gs.gamma = expr_from_json(ga["gamma"], "gauge.gamma");
    if (ga.contains("c1")) gs.c1 = expr_from_json(ga["c1"], "gauge.c1");
    if (ga.contains("c2")) gs.c2 = expr_from_json(ga["c2"], "gauge.c2");
    if (ga.contains("c_theta")) gs.c_theta = expr_from_json(ga["c_theta"], "gauge.c_theta");
    if (ga.contains("c_f")) gs.c_f = expr_from_json(ga["c_f"], "gauge.c_f");
    gs.epsilon = ga.value("epsilon", 1.0);
    gs.delta = ga.value("delta", 1.0);
    gs.c8 = ga.value("c8", 1.0);
    gs.params = s.params;
    s.gauge = gs;
  }
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["params"] = ordered_json::object();
  for (const auto& [k, v] : s.params) j["params"][k] = v;
  j["coefficients"] = ordered_json::object();
  j["coefficients"]["f"] = s.coeffs.f.str();
  j["coefficients"]["g"] = s.coeffs.g.str();
  j["coefficients"]["gamma"] = s.coeffs.gamma.str();
  if (s.v_built) {
    j["coefficients"]["v"] = "auto";
    if (s.v_built->closed_form)
      j["coefficients"]["v_closed"] = s.v_built->closed_form->str();
  } else {
    j["coefficients"]["v"] = s.coeffs.v.str();
  }
  if (s.coeffs.h) j["coefficients"]["h"] = s.coeffs.h->str();
  j["free"] = ordered_json{{"c1", s.free_fns.c1.str()},
                           {"c2", s.free_fns.c2.str()},
                           {"c3", s.free_fns.c3.str()},
                           {"c4", s.free_fns.c4.str()},
                           {"k1i", s.free_fns.k1i.str()}};
  j["grid"] = grid_to_json_obj(s.grid);
  if (!s.singular_x.empty() || !s.singular_t.empty())
    j["singular"] = ordered_json{{"x", s.singular_x}, {"t", s.singular_t}};
  if (s.psi_ref)
    j["psi_ref"] = ordered_json{{"re", s.psi_ref->re.str()}, {"im", s.psi_ref->im.str()}};
  else
    j["psi_ref"] = nullptr;
  if (s.gauge)
    j["gauge"] = ordered_json{{"beta", s.gauge->beta.str()},
                              {"gamma", s.gauge->gamma.str()},
                              {"c1", s.gauge->c1.str()},
                              {"c2", s.gauge->c2.str()},
                              {"c_theta", s.gauge->c_theta.str()},
                              {"c_f", s.gauge->c_f.str()},
                              {"epsilon", s.gauge->epsilon},
                              {"delta", s.gauge->delta},
                              {"c8", s.gauge->c8}};
  return j.dump(2);
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return scenario_from_json(ss.str());
}

// ---------------------------------------------------------------------------
// Reports

void finalize_exit_status(RunReport& r) {
  r.exit_status = 0;
  for (const auto& rep : r.reports)
    if (!rep.pass) r.exit_status = 1;
}

namespace {

ordered_json report_to_json_obj(const ResidualReport& r) {
  return ordered_json{{"condition", r.condition}, {"max_abs", r.max_abs},
                      {"rms", r.rms},             {"normalization", r.normalization},
                      {"tolerance", r.tolerance}, {"pass", r.pass},
                      {"grid", grid_to_json_obj(r.grid)}};
}

}  // namespace

std::string report_to_json(const ResidualReport& r) { return report_to_json_obj(r).dump(2); }

std::string run_report_to_json(const RunReport& r) {
  ordered_json j;
  j["command"] = r.command;
  j["scenario"] = r.scenario;
  j["reports"] = ordered_json::array();
  for (const auto& rep : r.reports) j["reports"].push_back(report_to_json_obj(rep));
  j["artifacts"] = r.artifacts;
  j["metrics"] = ordered_json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  j["wall_time_s"] = r.wall_time_s;
  j["exit_status"] = r.exit_status;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// CSV

namespace {

void write_csv_rows(std::ofstream& out, const GridSpec& g,
                    const std::function<void(int, int, std::ofstream&)>& row) {
  out << "x,t,re,im,abs\n";
  char buf[128];
  for (int j = 0; j < g.n_t; ++j)
    for (int i = 0; i < g.n_x; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,", g.x(i), g.t(j));
      out << buf;
      row(i, j, out);
    }
}

}  // namespace

void write_field_csv(const std::string& path, const ComplexField& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv_rows(out, f.grid, [&](int i, int j, std::ofstream& o) {
    char buf[128];
    const auto z = f.at(i, j);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", z.real(), z.imag(), std::abs(z));
    o << buf;
  });
}

void write_real_field_csv(const std::string& path, const RealField& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  write_csv_rows(out, f.grid, [&](int i, int j, std::ofstream& o) {
    char buf[128];
    const double v = f.at(i, j);
    std::snprintf(buf, sizeof buf, "%.17g,0,%.17g\n", v, std::fabs(v));
    o << buf;
  });
}

void write_grid_sidecar(const std::string& path, const GridSpec& g,
                        const std::map<std::string, double>& extra) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  ordered_json j;
  j["grid"] = grid_to_json_obj(g);
  for (const auto& [k, v] : extra) j[k] = v;
  out << j.dump(2) << "\n";
}

void write_convergence_csv(const std::string& path, const std::vector<ConvergenceRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "dx,dt,l_inf,l2,observed_order,anomaly\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", r.dx, r.dt, r.l_inf,
                  r.l2, r.observed_order, r.anomaly ? 1 : 0);
    out << buf;
  }
}

// ---------------------------------------------------------------------------
// Lax functions

namespace {

ComplexExpr complex_expr_from_json(const ordered_json& j, const char* what) {
  ComplexExpr out;
  if (j.contains("re")) out.re = expr_from_json(j["re"], what);
  if (j.contains("im")) out.im = expr_from_json(j["im"], what);
  return out;
}

ordered_json complex_expr_to_json(const ComplexExpr& e) {
  return ordered_json{{"re", e.re.str()}, {"im", e.im.str()}};
}

}  // namespace

LaxFunctions lax_functions_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("lax functions: invalid JSON: ") + e.what());
  }
  LaxFunctions L;
  auto get = [&](const char* name, ComplexExpr& slot) {
    if (j.contains(name)) slot = complex_expr_from_json(j[name], name);
  };
  get("f1", L.f1);
  get("f7", L.f7);
  get("g1", L.g1);
  get("g13", L.g13);
  get("g6", L.g6);
  get("g10", L.g10);
  get("p1", L.p1);
  get("p2", L.p2);
  L.lambda = j.value("lambda", 0.0);
  return L;
}

std::string lax_functions_to_json(const LaxFunctions& L) {
  ordered_json j;
  j["f1"] = complex_expr_to_json(L.f1);
  j["f7"] = complex_expr_to_json(L.f7);
  j["g1"] = complex_expr_to_json(L.g1);
  j["g13"] = complex_expr_to_json(L.g13);
  j["g6"] = complex_expr_to_json(L.g6);
  j["g10"] = complex_expr_to_json(L.g10);
  j["p1"] = complex_expr_to_json(L.p1);
  j["p2"] = complex_expr_to_json(L.p2);
  j["lambda"] = L.lambda;
  return j.dump(2);
}

LaxFunctions load_lax_functions_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open lax functions file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return lax_functions_from_json(ss.str());
}

}  // namespace nls

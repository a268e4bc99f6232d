#include "nls/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "nls/checks.hpp"

using namespace nls;

TEST_CASE("catalog lists eight scenarios and rejects unknown names") {
  const auto names = catalog_names();
  CHECK(names.size() == 8);
  for (const auto& n : names) CHECK_NOTHROW(catalog(n));
  CHECK_THROWS_AS(catalog("case99"), std::invalid_argument);
  CHECK_THROWS_AS(catalog("hd-case2", {{"p", 0.5}}), std::invalid_argument);
}

TEST_CASE("every catalog scenario passes its checks") {
  for (const auto& name : catalog_names()) {
    const Scenario s = catalog(name);
    const auto results = scenario_check(s);
    REQUIRE(!results.empty());
    for (const auto& r : results) {
      CAPTURE(name);
      CAPTURE(r.report.condition);
      CAPTURE(r.report.max_abs);
      CAPTURE(r.report.normalization);
      CHECK(r.report.pass);
    }
  }
}

TEST_CASE("catalog parameter overrides flow through") {
  const Scenario s = catalog("case3", {{"alpha", 1.0}});
  CHECK(s.params.at("alpha") == 1.0);
  for (const auto& r : scenario_check(s)) CHECK(r.report.pass);

  for (const auto& [name, key, value] :
       {std::tuple<const char*, const char*, double>{"hd-case1", "n", 2.0},
        {"hd-case2", "p", 0.75},
        {"hd-case2", "p", 1.5},
        {"case4", "n", 3.0}}) {
    const Scenario hd = catalog(name, {{key, value}});
    for (const auto& r : scenario_check(hd)) {
      CAPTURE(name);
      CAPTURE(value);
      CAPTURE(r.report.condition);
      CHECK(r.report.pass);
    }
  }
}

TEST_CASE("hd-case2 drift matches 2 p x^(2p-1) exactly") {
  const Scenario s = catalog("hd-case2", {{"p", 1.5}});
  REQUIRE(s.coeffs.h.has_value());
  for (double x : {0.5, 1.0, 2.0, 3.0}) {
    const double expect = 2.0 * 1.5 * std::pow(x, 2.0 * 1.5 - 1.0);
    CHECK(std::fabs(s.coeffs.h->eval(x, 0, s.params) - expect) <= 1e-12 * expect);
  }
}

TEST_CASE("scenario JSON round trip preserves the checks") {
  for (const char* name : {"case4", "eq19"}) {
    const Scenario s = catalog(name);
    const std::string text = scenario_to_json(s);
    const Scenario r = scenario_from_json(text);
    CHECK(r.name == s.name);
    const auto a = scenario_check(s);
    const auto b = scenario_check(r);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      CHECK(b[k].report.pass);
      CHECK(b[k].report.condition == a[k].report.condition);
    }
  }
}

TEST_CASE("scenario files with auto coefficients build f, gamma, v") {
  const char* text = R"json({
    "name": "built",
    "params": {"alpha": 0.4},
    "coefficients": {"f": "auto", "g": "1", "gamma": "auto", "v": "auto"},
    "free": {"c1": "1", "c2": "exp(alpha*t)"},
    "grid": {"x_min": -3, "x_max": 3, "n_x": 201, "t_min": 0, "t_max": 1, "n_t": 21},
    "psi_ref": null
  })json";
  const Scenario s = scenario_from_json(text);
  REQUIRE(s.v_built.has_value());
  // gamma = -alpha/2, v = alpha^2 (x - x_min)^2 / 4 up to the kernel pinning
  CHECK(s.coeffs.gamma.eval(0, 0.7, s.params) == doctest::Approx(-0.2));
  for (const auto& r : scenario_check(s)) {
    CAPTURE(r.report.condition);
    CHECK(r.report.pass);
  }
  // closed form was recognized for this polynomial integrand
  REQUIRE(s.v_built->closed_form.has_value());
}

TEST_CASE("polar psi_ref is converted to re/im") {
  const char* text = R"json({
    "name": "polar",
    "coefficients": {"f": "1", "g": "1", "gamma": "0", "v": "0"},
    "grid": {"x_min": -5, "x_max": 5, "n_x": 64, "t_min": 0, "t_max": 1, "n_t": 5},
    "psi_ref": {"abs": "sqrt(2)*sech(x)", "phase": "t"}
  })json";
  const Scenario s = scenario_from_json(text);
  REQUIRE(s.psi_ref.has_value());
  CHECK(s.psi_ref->re.eval(0.3, 0.9) ==
        doctest::Approx(std::sqrt(2.0) / std::cosh(0.3) * std::cos(0.9)).epsilon(1e-12));
  const auto rs = scenario_check(s);
  for (const auto& r : rs) CHECK(r.report.pass);
}

TEST_CASE("invalid scenarios are rejected with clear errors") {
  CHECK_THROWS_AS(scenario_from_json("not json"), std::invalid_argument);
  CHECK_THROWS_AS(scenario_from_json(R"json({"name":"x"})json"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      scenario_from_json(R"json({
        "name": "bad",
        "coefficients": {"g": "x +* t"},
        "grid": {"x_min": 0, "x_max": 1, "n_x": 11, "t_min": 0, "t_max": 1, "n_t": 3}
      })json"),
      doctest::Contains("bad expression"), std::invalid_argument);
  // declared singularity inside the grid
  CHECK_THROWS_AS(scenario_from_json(R"json({
        "name": "bad",
        "coefficients": {"g": "x"},
        "grid": {"x_min": -1, "x_max": 1, "n_x": 11, "t_min": 0, "t_max": 1, "n_t": 3},
        "singular": {"x": [0.0], "t": []}
      })json"),
                  std::invalid_argument);
}

TEST_CASE("run reports serialize deterministically") {
  const Scenario s = catalog("case2");
  RunReport a, b;
  a.command = b.command = "check";
  a.scenario = b.scenario = s.name;
  for (const auto& r : scenario_check(s)) a.reports.push_back(r.report);
  for (const auto& r : scenario_check(s)) b.reports.push_back(r.report);
  finalize_exit_status(a);
  finalize_exit_status(b);
  CHECK(a.exit_status == 0);
  CHECK(run_report_to_json(a) == run_report_to_json(b));
}

TEST_CASE("field CSV dumps carry full precision") {
  const auto grid = GridSpec::make(0, 1, 5, 0, 0.5, 2);
  ComplexField f(grid);
  f.at(2, 1) = {1.0 / 3.0, -2.0 / 7.0};
  const std::string path = "/tmp/nls_test_field.csv";
  write_field_csv(path, f);
  std::ifstream in(path);
  std::string line, hit;
  std::getline(in, line);
  CHECK(line == "x,t,re,im,abs");
  while (std::getline(in, line))
    if (line.find("0.33333333333333331") != std::string::npos) hit = line;
  CHECK(!hit.empty());
  std::remove(path.c_str());
}

TEST_CASE("lax functions JSON round trip") {
  const LaxFunctions L = akns_case1(1.25);
  const std::string text = lax_functions_to_json(L);
  const LaxFunctions R = lax_functions_from_json(text);
  CHECK(R.lambda == 1.25);
  const auto rs = compat_residuals(R, CoefficientSet{}, GridSpec::make(-2, 2, 21, 0, 1, 5));
  for (const auto& r : rs) CHECK(r.report.max_abs <= 1e-12);
  CHECK_THROWS_AS(lax_functions_from_json("nope"), std::invalid_argument);
}

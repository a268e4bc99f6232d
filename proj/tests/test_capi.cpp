// Exercises the extern-C surface exactly as an external client would: only
// nls_c.h, opaque handles and JSON strings.

#include <cmath>
#include <cstring>
#include <string>

#include "doctest.h"
#include "nls/nls_c.h"

namespace {

struct Str {
  char* p = nullptr;
  ~Str() { nls_string_free(p); }
  std::string s() const { return p ? p : ""; }
};

}  // namespace

TEST_CASE("version and error plumbing") {
  CHECK(nls_version() != nullptr);
  nls_expr* e = nullptr;
  CHECK(nls_expr_parse("x +* t", &e) == NLS_INVALID);
  CHECK(std::strlen(nls_last_error()) > 0);
  CHECK(e == nullptr);
}

TEST_CASE("expression lifecycle") {
  nls_expr* e = nullptr;
  REQUIRE(nls_expr_parse("x^2*exp(a*t)", &e) == NLS_OK);
  double v = 0;
  CHECK(nls_expr_eval(e, 2.0, 0.0, R"({"a": 0.5})", &v) == NLS_OK);
  CHECK(v == doctest::Approx(4.0));
  CHECK(nls_expr_eval(e, 2.0, 0.0, nullptr, &v) == NLS_DOMAIN_ERROR);  // unbound a

  nls_expr* d = nullptr;
  REQUIRE(nls_expr_diff(e, "x", 1, &d) == NLS_OK);
  CHECK(nls_expr_eval(d, 3.0, 0.0, R"({"a": 0.0})", &v) == NLS_OK);
  CHECK(v == doctest::Approx(6.0));
  CHECK(nls_expr_diff(e, "y", 1, &d) == NLS_INVALID);

  Str txt;
  REQUIRE(nls_expr_to_string(d, &txt.p) == NLS_OK);
  CHECK(!txt.s().empty());

  nls_expr_free(e);
  nls_expr* s = nullptr;
  REQUIRE(nls_expr_parse("0*x + 1*t", &e) == NLS_OK);
  REQUIRE(nls_expr_simplify(e, &s) == NLS_OK);
  Str simp;
  REQUIRE(nls_expr_to_string(s, &simp.p) == NLS_OK);
  CHECK(simp.s() == "t");
  nls_expr_free(e);
  nls_expr_free(d);
  nls_expr_free(s);
}

TEST_CASE("catalog and scenario round trip") {
  Str names;
  REQUIRE(nls_catalog_list(&names.p) == NLS_OK);
  CHECK(names.s().find("hd-case2") != std::string::npos);

  nls_scenario* s = nullptr;
  REQUIRE(nls_scenario_from_catalog("case3", R"({"alpha": 0.5})", &s) == NLS_OK);
  Str text;
  REQUIRE(nls_scenario_to_json(s, &text.p) == NLS_OK);
  nls_scenario* r = nullptr;
  REQUIRE(nls_scenario_from_json(text.s().c_str(), &r) == NLS_OK);
  nls_scenario_free(s);
  nls_scenario_free(r);

  CHECK(nls_scenario_from_catalog("case99", nullptr, &s) == NLS_INVALID);
  CHECK(nls_scenario_from_file("/nonexistent/path.json", &s) == NLS_INVALID);
}

TEST_CASE("check runs pass and fail through the C API") {
  nls_scenario* s = nullptr;
  REQUIRE(nls_scenario_from_catalog("case2", nullptr, &s) == NLS_OK);
  Str report;
  CHECK(nls_run_check(s, nullptr, nullptr, &report.p) == NLS_OK);
  CHECK(report.s().find("\"exit_status\": 0") != std::string::npos);
  nls_scenario_free(s);

  // break the potential; the v condition must fail with max residual 4
  REQUIRE(nls_scenario_from_catalog("case1", nullptr, &s) == NLS_OK);
  Str text;
  REQUIRE(nls_scenario_to_json(s, &text.p) == NLS_OK);
  std::string edited = text.s();
  const auto pos = edited.find("\"v\": \"0\"");
  REQUIRE(pos != std::string::npos);
  edited.replace(pos, std::strlen("\"v\": \"0\""), "\"v\": \"x^2\"");
  nls_scenario_free(s);
  REQUIRE(nls_scenario_from_json(edited.c_str(), &s) == NLS_OK);
  Str report2;
  CHECK(nls_run_check(s, nullptr, nullptr, &report2.p) == NLS_CHECK_FAILED);
  CHECK(report2.s().find("\"max_abs\": 4.0") != std::string::npos);
  nls_scenario_free(s);
}

TEST_CASE("construct through the C API") {
  const char* req = R"({
    "g": "x", "c1": "1", "c2": "1",
    "grid": {"x_min": 0.5, "x_max": 3, "n_x": 401, "t_min": 0, "t_max": 1, "n_t": 5}
  })";
  Str report;
  CHECK(nls_run_construct(req, nullptr, &report.p) == NLS_OK);
  CHECK(report.s().find("\"pass\": true") != std::string::npos);

  const char* bad = R"({
    "g": "0", "c1": "1", "c2": "1",
    "grid": {"x_min": 0.5, "x_max": 3, "n_x": 101, "t_min": 0, "t_max": 1, "n_t": 3}
  })";
  Str r2;
  const nls_status st = nls_run_construct(bad, nullptr, &r2.p);
  CHECK((st == NLS_INVALID || st == NLS_DOMAIN_ERROR));
}

TEST_CASE("map and lax and simulate through the C API") {
  nls_scenario* s = nullptr;
  REQUIRE(nls_scenario_from_catalog("eq19", nullptr, &s) == NLS_OK);
  Str map_report;
  CHECK(nls_run_map(s, R"({"q": "sn"})", nullptr, &map_report.p) == NLS_OK);
  CHECK(map_report.s().find("map_vs_ref_linf") != std::string::npos);
  nls_scenario_free(s);

  REQUIRE(nls_scenario_from_catalog("case1", nullptr, &s) == NLS_OK);
  Str lax_report;
  CHECK(nls_run_lax(s, R"({"akns": 1.0})", nullptr, &lax_report.p) == NLS_OK);

  Str sim_report;
  CHECK(nls_run_simulate(s, R"({"dt": 1e-3, "T": 0.02})", nullptr, &sim_report.p) == NLS_OK);
  CHECK(sim_report.s().find("linf_error_vs_ref") != std::string::npos);
  nls_scenario_free(s);

  // map demands a gauge
  REQUIRE(nls_scenario_from_catalog("case1", nullptr, &s) == NLS_OK);
  Str r;
  CHECK(nls_run_map(s, nullptr, nullptr, &r.p) == NLS_INVALID);
  nls_scenario_free(s);
}

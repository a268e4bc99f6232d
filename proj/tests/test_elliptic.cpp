#include "nls/elliptic.hpp"

#include <cmath>

#include "doctest.h"
#include "test_util.hpp"

using namespace nls;
using nls::testing::jacobi_oracle;

TEST_CASE("sn cn dn special values") {
  for (double m : {-1.0, -0.3, 0.0, 0.5, 1.0, 1.8}) {
    const auto j = jacobi_scd(0.0, m);
    CHECK(j.sn == 0.0);
    CHECK(j.cn == doctest::Approx(1.0));
    CHECK(j.dn == doctest::Approx(1.0));
  }
  // m = 0 / m = 1 reductions
  CHECK(jacobi_scd(0.7, 0.0).sn == doctest::Approx(std::sin(0.7)).epsilon(1e-14));
  CHECK(jacobi_scd(0.7, 1.0).sn == doctest::Approx(std::tanh(0.7)).epsilon(1e-14));
}

TEST_CASE("sn(u|-1) against the ODE oracle at u = 1") {
  const auto j = jacobi_scd(1.0, -1.0);
  const auto o = jacobi_oracle(1.0, -1.0);
  CHECK(std::fabs(j.sn - o.s) <= 1e-12);
  CHECK(std::fabs(j.cn - o.c) <= 1e-12);
  CHECK(std::fabs(j.dn - o.d) <= 1e-12);
}

TEST_CASE("sn cn dn match the ODE oracle across moduli") {
  for (double m : {-1.0, -0.4, 0.25, 0.6, 0.95, 1.7}) {
    for (double u = -3.0; u <= 3.0; u += 0.37) {
      const auto j = jacobi_scd(u, m);
      const auto o = jacobi_oracle(u, m);
      CAPTURE(u);
      CAPTURE(m);
      CHECK(std::fabs(j.sn - o.s) <= 1e-11);
      CHECK(std::fabs(j.cn - o.c) <= 1e-11);
      CHECK(std::fabs(j.dn - o.d) <= 1e-11);
    }
  }
}

TEST_CASE("elliptic identities hold pointwise") {
  for (double m : {-1.0, 0.0, 0.5, 1.0}) {
    for (double u = -3.0; u <= 3.0; u += 0.05) {
      const auto j = jacobi_scd(u, m);
      CAPTURE(u);
      CAPTURE(m);
      CHECK(std::fabs(j.sn * j.sn + j.cn * j.cn - 1.0) <= 1e-10);
      CHECK(std::fabs(j.dn * j.dn + m * j.sn * j.sn - 1.0) <= 1e-10);
    }
  }
}

TEST_CASE("large arguments stay accurate") {
  for (double u : {8.0, -12.5, 20.0}) {
    const auto j = jacobi_scd(u, -1.0);
    const auto o = jacobi_oracle(u, -1.0, 5e-5);
    CHECK(std::fabs(j.sn - o.s) <= 1e-10);
    CHECK(std::fabs(j.sn * j.sn + j.cn * j.cn - 1.0) <= 1e-12);
  }
}

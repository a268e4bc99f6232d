#include "nls/elliptic.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace nls {

namespace {

// AGM scale for 0 <= m <= 1 (A&S 16.4). The phase recursion
//   phi_{i-1} = (phi_i + asin((c_i/a_i) sin phi_i)) / 2
// descends from phi_N = 2^N a_N u; sn = sin phi_0, cn = cos phi_0,
// dn = cos phi_0 / cos(phi_1 - phi_0).
JacobiSCD jacobi_agm(double u, double m) {
  if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
  if (m == 1.0) {
    const double s = std::tanh(u);
    const double c = 1.0 / std::cosh(u);
    return {s, c, c};
  }

  constexpr int kMaxIter = 32;
  double a[kMaxIter + 1], c[kMaxIter + 1];
  a[0] = 1.0;
  c[0] = std::sqrt(m);
  double b = std::sqrt(1.0 - m);
  int n = 0;
  while (n < kMaxIter) {
    if (std::fabs(c[n]) <= 1e-17 * a[n]) break;
    const double an = 0.5 * (a[n] + b);
    c[n + 1] = 0.5 * (a[n] - b);
    b = std::sqrt(a[n] * b);
    a[n + 1] = an;
    ++n;
  }

  double phi = std::ldexp(a[n], n) * u;
  double phi1 = phi;
  for (int i = n; i >= 1; --i) {
    if (i == 1) phi1 = phi;  // phi_1 entering the final halving
    double s = (c[i] / a[i]) * std::sin(phi);
    if (s > 1.0) s = 1.0;
    if (s < -1.0) s = -1.0;
    phi = 0.5 * (phi + std::asin(s));
  }

  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  double dn;
  if (n >= 1) {
    dn = cn / std::cos(phi1 - phi);  // A&S 16.4.4
  } else {
    // m below the AGM tolerance; the direct identity is well conditioned.
    dn = std::sqrt(1.0 - m * sn * sn);
  }
  return {sn, cn, dn};
}

}  // namespace

JacobiSCD jacobi_scd(double u, double m) {
  if (!std::isfinite(u) || !std::isfinite(m))
    throw std::domain_error("jacobi_scd: non-finite argument");
  // sn, cn, dn of the same argument are usually requested back to back.
  thread_local double cached_u = std::numeric_limits<double>::quiet_NaN();
  thread_local double cached_m = 0;
  thread_local JacobiSCD cached{};
  if (u == cached_u && m == cached_m) return cached;
  const JacobiSCD r = [&] {
    if (m < 0.0) {
      // Negative parameter (A&S 16.10): with mu = -m/(1-m) in (0,1),
      //   sn(u|m) = sd(u*sqrt(1-m)|mu)/sqrt(1-m),
      //   cn(u|m) = cd(..), dn(u|m) = nd(..).
      const double f = std::sqrt(1.0 - m);
      const double mu = -m / (1.0 - m);
      const JacobiSCD j = jacobi_agm(u * f, mu);
      return JacobiSCD{j.sn / (f * j.dn), j.cn / j.dn, 1.0 / j.dn};
    }
    if (m > 1.0) {
      // Reciprocal parameter (A&S 16.11).
      const double f = std::sqrt(m);
      const JacobiSCD j = jacobi_agm(u * f, 1.0 / m);
      return JacobiSCD{j.sn / f, j.dn, j.cn};
    }
    return jacobi_agm(u, m);
  }();
  cached_u = u;
  cached_m = m;
  cached = r;
  return r;
}

}  // namespace nls

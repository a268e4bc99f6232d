#pragma once

// Jacobi elliptic functions sn, cn, dn for any real parameter m.

namespace nls {

struct JacobiSCD {
  double sn;
  double cn;
  double dn;
};

// Computes sn(u|m), cn(u|m), dn(u|m) by the arithmetic-geometric mean
// descent for m in (0,1); m < 0 and m > 1 are mapped into [0,1] with the
// standard negative-parameter and reciprocal-parameter transformations.
JacobiSCD jacobi_scd(double u, double m);

}  // namespace nls

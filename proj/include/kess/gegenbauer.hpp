#pragma once

#include "kess/errors.hpp"

namespace kess::detail {

/// Truncated Schoenberg series  sum_{m=0}^{M} rho^m C_m^(lambda)(t) / C_m^(lambda)(1)
/// with lambda = (d-2)/2, evaluated through the three-term recurrence on the
/// normalized ratio R_m(t) = C_m^(lambda)(t) / C_m^(lambda)(1):
///
///   R_0 = 1,  R_1 = t,
///   R_m = [ 2 t (m + lambda - 1) R_{m-1} - (m - 1) R_{m-2} ] / (m + 2 lambda - 1).
///
/// |R_m(t)| <= 1 on [-1, 1], so the tail beyond M is bounded by
/// rho^{M+1} / (1 - rho). Templated on the scalar so the truncation bound can
/// be checked at extended precision.
template <typename Real>
Real gegenbauer_truncated_series(int d, Real rho, int truncation, Real t) {
  if (d < 3) throw ValidationError("gegenbauer series: need d >= 3");
  if (truncation < 1) throw ValidationError("gegenbauer series: need truncation >= 1");
  const Real lambda = Real(d - 2) / Real(2);
  Real prev2 = Real(1);  // R_0
  Real prev1 = t;        // R_1
  Real sum = Real(1) + rho * t;
  Real rho_pow = rho * rho;
  for (int m = 2; m <= truncation; ++m) {
    const Real r = (Real(2) * t * (Real(m) + lambda - Real(1)) * prev1 -
                    Real(m - 1) * prev2) /
                   (Real(m) + Real(2) * lambda - Real(1));
    sum += rho_pow * r;
    rho_pow *= rho;
    prev2 = prev1;
    prev1 = r;
  }
  return sum;
}

}  // namespace kess::detail

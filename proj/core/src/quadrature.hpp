#pragma once

// Internal adaptive Gauss-Kronrod 7-15 quadrature used by the analytic
// propagation engine. Not installed.

#include <cmath>
#include <functional>

#include "qsl_lab/matrix2.hpp"

namespace qsl_lab::detail {

struct GkEstimate {
  double value = 0.0;
  double error = 0.0;
};

template <typename F>
GkEstimate gauss_kronrod_15(const F& f, double a, double b) {
  // Kronrod abscissae (positive half) and weights; rows 1,3,5,7 extend the
  // embedded 7-point Gauss rule.
  static constexpr double xk[8] = {
      0.991455371120813, 0.949107912342759, 0.864864423359769,
      0.741531185599394, 0.586087235467691, 0.405845151377397,
      0.207784955007898, 0.0};
  static constexpr double wk[8] = {
      0.022935322010529, 0.063092092629979, 0.104790010322250,
      0.140653259715525, 0.169004726639267, 0.190350578064785,
      0.204432940075298, 0.209482141084728};
  static constexpr double wg[4] = {0.129484966168870, 0.279705391489277,
                                   0.381830050505119, 0.417959183673469};

  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  double kron = 0.0;
  double gauss = 0.0;
  for (int i = 0; i < 7; ++i) {
    const double fa = f(c - hw * xk[i]);
    const double fb = f(c + hw * xk[i]);
    kron += wk[i] * (fa + fb);
    if (i % 2 == 1) {
      gauss += wg[i / 2] * (fa + fb);
    }
  }
  const double fc = f(c);
  kron += wk[7] * fc;
  gauss += wg[3] * fc;
  kron *= hw;
  gauss *= hw;
  return {kron, std::abs(kron - gauss)};
}

/// Adaptive bisection until the panel error estimate falls below abs_tol.
/// Throws NumericalError when the recursion cannot reach the tolerance.
template <typename F>
double adaptive_quadrature(const F& f, double a, double b, double abs_tol,
                           int depth = 0) {
  const auto est = gauss_kronrod_15(f, a, b);
  if (est.error <= abs_tol || b - a <= 1e-14 * std::max(1.0, std::abs(a))) {
    return est.value;
  }
  if (depth > 48) {
    throw NumericalError("adaptive quadrature failed to converge");
  }
  const double c = 0.5 * (a + b);
  return adaptive_quadrature(f, a, c, 0.5 * abs_tol, depth + 1) +
         adaptive_quadrature(f, c, b, 0.5 * abs_tol, depth + 1);
}

}  // namespace qsl_lab::detail

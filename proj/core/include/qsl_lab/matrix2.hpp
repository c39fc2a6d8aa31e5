#pragma once

#include <complex>
#include <stdexcept>
#include <utility>

namespace qsl_lab {

using complexd = std::complex<double>;

/// Numerical failure distinct from a caller error: step-size underflow,
/// quadrature non-convergence, invariant repair out of bounds, and the like.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense 2x2 complex matrix. Plain value type, no invariants of its own;
/// carries both states and generator outputs.
struct ComplexMatrix2 {
  complexd m00{0.0, 0.0};
  complexd m01{0.0, 0.0};
  complexd m10{0.0, 0.0};
  complexd m11{0.0, 0.0};

  static ComplexMatrix2 zero() { return {}; }
  static ComplexMatrix2 identity() {
    return {complexd{1.0, 0.0}, complexd{0.0, 0.0}, complexd{0.0, 0.0},
            complexd{1.0, 0.0}};
  }
};

inline ComplexMatrix2 operator+(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
}

inline ComplexMatrix2 operator-(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}

inline ComplexMatrix2 operator*(const complexd& s, const ComplexMatrix2& a) {
  return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
}

inline ComplexMatrix2 operator*(double s, const ComplexMatrix2& a) {
  return complexd{s, 0.0} * a;
}

inline ComplexMatrix2 mul(const ComplexMatrix2& a, const ComplexMatrix2& b) {
  return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
          a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
}

inline ComplexMatrix2 adjoint(const ComplexMatrix2& a) {
  return {std::conj(a.m00), std::conj(a.m10), std::conj(a.m01),
          std::conj(a.m11)};
}

inline complexd trace(const ComplexMatrix2& a) { return a.m00 + a.m11; }

inline complexd det(const ComplexMatrix2& a) {
  return a.m00 * a.m11 - a.m01 * a.m10;
}

/// max |entry| of a.
double max_abs(const ComplexMatrix2& a);

/// max |entry| of a - a^dagger.
double hermiticity_defect(const ComplexMatrix2& a);

/// (a + a^dagger)/2.
ComplexMatrix2 hermitize(const ComplexMatrix2& a);

/// Eigenvalues of a Hermitian matrix, in closed form, descending.
/// Throws std::invalid_argument if the hermiticity defect exceeds 1e-10.
std::pair<double, double> hermitian_eigenvalues(const ComplexMatrix2& m);

// Fixed basis convention: sigma_z = diag(1, -1), index 0 is the
// sigma_z = +1 eigenstate, sigma_pm = (sigma_x +- i sigma_y)/2.
ComplexMatrix2 pauli_x();
ComplexMatrix2 pauli_y();
ComplexMatrix2 pauli_z();
ComplexMatrix2 sigma_plus();
ComplexMatrix2 sigma_minus();

}  // namespace qsl_lab

#include "qsl_lab/matrix2.hpp"

#include <algorithm>
#include <cmath>

namespace qsl_lab {

double max_abs(const ComplexMatrix2& a) {
  return std::max({std::abs(a.m00), std::abs(a.m01), std::abs(a.m10),
                   std::abs(a.m11)});
}

double hermiticity_defect(const ComplexMatrix2& a) {
  return max_abs(a - adjoint(a));
}

ComplexMatrix2 hermitize(const ComplexMatrix2& a) {
  return 0.5 * (a + adjoint(a));
}

std::pair<double, double> hermitian_eigenvalues(const ComplexMatrix2& m) {
  if (hermiticity_defect(m) > 1e-10) {
    throw std::invalid_argument(
        "hermitian_eigenvalues: matrix is not Hermitian within 1e-10");
  }
  const double tr = m.m00.real() + m.m11.real();
  const double diff = m.m00.real() - m.m11.real();
  // tr^2 - 4 det = (m00 - m11)^2 + 4|m01|^2, nonnegative for Hermitian input.
  const double disc = diff * diff + 4.0 * std::norm(m.m01);
  const double root = std::sqrt(std::max(disc, 0.0));
  return {0.5 * (tr + root), 0.5 * (tr - root)};
}

ComplexMatrix2 pauli_x() {
  return {{0.0, 0.0}, {1.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}};
}

ComplexMatrix2 pauli_y() {
  return {{0.0, 0.0}, {0.0, -1.0}, {0.0, 1.0}, {0.0, 0.0}};
}

ComplexMatrix2 pauli_z() {
  return {{1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {-1.0, 0.0}};
}

ComplexMatrix2 sigma_plus() {
  return {{0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
}

ComplexMatrix2 sigma_minus() {
  return {{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}};
}

}  // namespace qsl_lab

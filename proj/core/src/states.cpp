#include "qsl_lab/states.hpp"

#include <cmath>
#include <sstream>

namespace qsl_lab {

std::string StateDiagnostics::describe() const {
  std::ostringstream os;
  os << "hermiticity defect " << hermiticity_defect << " (tol " << kHermTol
     << "), trace defect " << trace_defect << " (tol " << kTraceTol
     << "), min eigenvalue " << min_eigenvalue << " (tol -" << kPositivityTol
     << ")";
  return os.str();
}

StateDiagnostics diagnose_density(const ComplexMatrix2& m) {
  StateDiagnostics d;
  d.hermiticity_defect = hermiticity_defect(m);
  d.trace_defect = std::abs(trace(m) - complexd{1.0, 0.0});
  d.min_eigenvalue = hermitian_eigenvalues(hermitize(m)).second;
  return d;
}

ValidationResult validate_density(const ComplexMatrix2& m) {
  ValidationResult r;
  r.diagnostics = diagnose_density(m);
  if (r.diagnostics.ok()) {
    r.state = DensityMatrix::unchecked(m);
  }
  return r;
}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix2& m) {
  auto r = validate_density(m);
  if (!r.state) {
    throw std::invalid_argument("invalid density matrix: " +
                                r.diagnostics.describe());
  }
  return *r.state;
}

bool DensityMatrix::is_pure(double tol) const {
  return std::abs(det(m_)) <= tol;
}

double BlochVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

PureStateParam::PureStateParam(double value) : a(value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::domain_error("pure-state parameter a must lie in [0, 1]");
  }
}

DensityMatrix pure_state_from_a(PureStateParam p) {
  const double off = std::sqrt(p.a * (1.0 - p.a));
  ComplexMatrix2 m{{p.a, 0.0}, {off, 0.0}, {off, 0.0}, {1.0 - p.a, 0.0}};
  return DensityMatrix::from_matrix(m);
}

BlochVector bloch_from_density(const DensityMatrix& rho) {
  const ComplexMatrix2& m = rho.matrix();
  return {2.0 * m.m01.real(), -2.0 * m.m01.imag(),
          m.m00.real() - m.m11.real()};
}

DensityMatrix density_from_bloch(const BlochVector& r) {
  if (r.norm() > 1.0 + kPositivityTol) {
    throw std::domain_error("Bloch vector lies outside the unit ball");
  }
  ComplexMatrix2 m{{0.5 * (1.0 + r.z), 0.0},
                   {0.5 * r.x, -0.5 * r.y},
                   {0.5 * r.x, 0.5 * r.y},
                   {0.5 * (1.0 - r.z), 0.0}};
  return DensityMatrix::from_matrix(m);
}

}  // namespace qsl_lab

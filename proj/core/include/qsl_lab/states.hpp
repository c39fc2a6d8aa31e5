#pragma once

#include <optional>
#include <string>

#include "qsl_lab/matrix2.hpp"

namespace qsl_lab {

inline constexpr double kHermTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kPositivityTol = 1e-10;

/// Violation magnitudes for the density-matrix invariants. All three are
/// reported even when the matrix is valid.
struct StateDiagnostics {
  double hermiticity_defect = 0.0;  ///< max |m - m^dagger| entry
  double trace_defect = 0.0;        ///< |tr m - 1|
  double min_eigenvalue = 0.0;      ///< smaller eigenvalue of hermitize(m)

  bool ok() const {
    return hermiticity_defect <= kHermTol && trace_defect <= kTraceTol &&
           min_eigenvalue >= -kPositivityTol;
  }
  std::string describe() const;
};

class DensityMatrix;
struct ValidationResult;

/// Checks the density-matrix invariants without throwing.
ValidationResult validate_density(const ComplexMatrix2& m);

/// 2x2 Hermitian, unit-trace, positive-semidefinite qubit state.
class DensityMatrix {
 public:
  /// Maximally mixed state I/2.
  DensityMatrix()
      : m_{{0.5, 0.0}, {0.0, 0.0}, {0.0, 0.0}, {0.5, 0.0}} {}

  /// Validates all invariants; throws std::invalid_argument with the
  /// diagnostics message on failure.
  static DensityMatrix from_matrix(const ComplexMatrix2& m);

  const ComplexMatrix2& matrix() const { return m_; }
  double p00() const { return m_.m00.real(); }
  double p11() const { return m_.m11.real(); }
  complexd coherence() const { return m_.m01; }

  /// det(rho) = 0 for pure states; `tol` matches the pure-detection rule
  /// used by the fidelity reduction.
  bool is_pure(double tol = 1e-10) const;

 private:
  friend ValidationResult validate_density(const ComplexMatrix2& m);
  explicit DensityMatrix(const ComplexMatrix2& m) : m_(m) {}
  static DensityMatrix unchecked(const ComplexMatrix2& m) {
    return DensityMatrix(m);
  }
  ComplexMatrix2 m_;
};

/// Outcome of validate_density: either the state or the reasons it failed.
struct ValidationResult {
  std::optional<DensityMatrix> state;
  StateDiagnostics diagnostics;
};

/// Diagnostics only, never throws.
StateDiagnostics diagnose_density(const ComplexMatrix2& m);

/// rho = (I + x sigma_x + y sigma_y + z sigma_z) / 2.
struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double norm() const;
};

/// Initial-state parameter a in [0, 1]; a = 1 puts all population in the
/// index-0 level. The relative phase is not exposed: the dynamics handled
/// here commutes with rotations about sigma_z, so it drops out.
struct PureStateParam {
  explicit PureStateParam(double value);
  double a;
};

/// [[a, sqrt(a(1-a))], [sqrt(a(1-a)), 1-a]] -- a pure state for every a.
DensityMatrix pure_state_from_a(PureStateParam a);

BlochVector bloch_from_density(const DensityMatrix& rho);

/// Inverse of bloch_from_density. Throws std::domain_error if |r| > 1 + 1e-10.
DensityMatrix density_from_bloch(const BlochVector& r);

}  // namespace qsl_lab

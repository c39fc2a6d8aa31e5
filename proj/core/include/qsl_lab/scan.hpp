#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qsl_lab/divisibility.hpp"
#include "qsl_lab/qsl.hpp"
#include "qsl_lab/rate_model.hpp"

namespace qsl_lab {

/// Two results within this distance of 1 count as "optimal" (no speed-up);
/// sits well above integrator error and well below visible plot features.
inline constexpr double kOptimalRatioTol = 1e-6;

struct ScanConfig {
  std::string model;
  std::map<std::string, double> params;
  std::size_t a_count = 101;   ///< grid over [0, 1], endpoints included
  std::size_t tau_count = 200; ///< grid over (0, tau_max], endpoint included
  double tau_max = 0.0;        ///< 0: default for the model (3 or 10)
  std::size_t nodes = 2001;    ///< trajectory output nodes per cell
  double rtol = 1e-10;
  double atol = 1e-12;
  unsigned threads = 0;        ///< 0: QSL_LAB_THREADS, then hardware width
  std::string output_path;     ///< informational; echoed into provenance
};

struct ScanRow {
  double a = 0.0;
  double tau = 0.0;
  double ratio = 0.0;
  double bures_angle = 0.0;
  double lambda_op = 0.0;
};

struct ScanResult {
  ScanConfig config;
  std::vector<double> a_grid;
  std::vector<double> tau_grid;
  std::vector<ScanRow> rows;  ///< row-major: a outer, tau inner
  DivisibilityVerdict verdict;
  std::string artifact_version;
  std::string timestamp;  ///< ISO 8601 UTC; not part of the CSV output
};

/// Evaluates qsl_ratio over the full (a, tau) grid. Grid cells run
/// concurrently; rows are emitted in row-major order regardless of the
/// execution schedule and the numbers do not depend on the thread count.
/// Any cell failure aborts the scan naming the offending grid point.
ScanResult qsl_surface_scan(const ScanConfig& config);

/// Columns: a,tau,ratio,bures_angle,lambda_op. Deterministic bytes for a
/// given config: shortest round-trip doubles, LF line endings, no
/// timestamps.
void write_scan_csv(const ScanResult& result, std::ostream& out);

/// Config echo, artifact version, timestamp and divisibility class as a
/// JSON object; kept out of the CSV so repeated runs stay byte-identical.
std::string scan_provenance_json(const ScanResult& result);

struct PanelRow {
  double t = 0.0;
  double p0 = 0.0;
  double p1 = 0.0;
  double coh_abs = 0.0;
  double fidelity = 0.0;
  double qsl_ratio_running = 1.0;  ///< ratio for the horizon [0, t]
};

/// Per-node populations, |coherence|, fidelity and the running QSL ratio
/// of the trajectory from pure_state_from_a(a) over [0, tau].
std::vector<PanelRow> trajectory_panel(const RateModel& model,
                                       PureStateParam a, double tau,
                                       std::size_t node_count = 2001,
                                       double rtol = 1e-10,
                                       double atol = 1e-12);

/// Columns: t,p0,p1,coh_abs,fidelity,qsl_ratio_running.
void write_panel_csv(const std::vector<PanelRow>& rows, std::ostream& out);

struct ScanComparison {
  /// ratio(B) - ratio(A) per row, aligned with the row-major grid.
  std::vector<double> ratio_diff;
  double max_abs_diff = 0.0;
  /// Largest |diff| over points where at least one scan shows a speed-up.
  double max_abs_diff_subunity = 0.0;
  std::size_t optimal_only_in_a = 0;
  std::size_t optimal_only_in_b = 0;

  bool optimal_sets_coincide() const {
    return optimal_only_in_a == 0 && optimal_only_in_b == 0;
  }
};

/// Per-point ratio differences plus the optimal-region summary. Throws
/// std::invalid_argument unless both scans used identical grids.
ScanComparison compare_scans(const ScanResult& a, const ScanResult& b);

}  // namespace qsl_lab

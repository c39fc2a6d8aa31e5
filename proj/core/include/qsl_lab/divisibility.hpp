#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qsl_lab/rate_model.hpp"

namespace qsl_lab {

enum class DivisibilityClass { CP_DIVISIBLE, P_DIVISIBLE_ONLY, NON_P_DIVISIBLE };

const char* to_string(DivisibilityClass c);

/// Which rate condition failed. RATE_SIGN: some gamma_i(t) < 0 where the
/// check requires it nonnegative. DISSIPATIVITY: sqrt(gamma1 gamma2) +
/// 2 gamma3 < 0. BORDERLINE: the expression touches zero at an isolated
/// time and d gamma3/dt > gamma3 (gamma1 + gamma2) there.
enum class DivisibilityCondition { RATE_SIGN, DISSIPATIVITY, BORDERLINE };

const char* to_string(DivisibilityCondition c);

struct ViolationRecord {
  DivisibilityCondition condition;
  double t_lo = 0.0;
  double t_hi = 0.0;
  /// Most negative value of the violated expression on the interval; for
  /// BORDERLINE records, the (positive) margin of the stricter rule.
  double worst = 0.0;
};

struct CheckResult {
  bool passed = true;
  std::vector<ViolationRecord> violations;
};

/// CP-divisible over [0, T] iff all three rates stay >= -1e-12 at every
/// sample; sign changes are refined by bisection to 1e-10 in t.
CheckResult check_cp_divisible(const RateModel& model, double T,
                               double samples_per_unit_time = 0.0);

/// P-divisible over [0, T] iff gamma1, gamma2 >= 0 and
/// sqrt(gamma1 gamma2) + 2 gamma3 > 0, where isolated touching zeros of
/// the latter are decided by the stricter borderline rule (a violation
/// when d gamma3/dt > gamma3 (gamma1 + gamma2); derivative by central
/// difference with step 1e-6 max(1, T)).
CheckResult check_p_divisible(const RateModel& model, double T,
                              double samples_per_unit_time = 0.0);

struct DivisibilityVerdict {
  DivisibilityClass klass = DivisibilityClass::CP_DIVISIBLE;
  double window_start = 0.0;
  double window_end = 0.0;
  std::vector<ViolationRecord> violations;
  double samples_per_unit_time = 0.0;
};

/// Runs both checks: CP_DIVISIBLE when the CP check passes, otherwise
/// P_DIVISIBLE_ONLY when the P check passes, otherwise NON_P_DIVISIBLE.
/// The violation list carries the P-side records first, then the CP-side
/// rate-sign records that explain a lost CP property.
DivisibilityVerdict classify(const RateModel& model, double T,
                             double samples_per_unit_time = 0.0);

/// JSON object {class, window, violations: [{condition, t_lo, t_hi, worst}]}.
std::string to_json(const DivisibilityVerdict& verdict);

/// Bisects the P-divisibility transition of a one-parameter model family
/// to 1e-3 in k. Throws std::invalid_argument when both endpoints classify
/// identically.
double critical_k_scan(const std::function<RateModel(double)>& family,
                       double k_lo, double k_hi, double T);

}  // namespace qsl_lab

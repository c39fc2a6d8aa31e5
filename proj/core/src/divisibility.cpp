#include "qsl_lab/divisibility.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "qsl_lab/matrix2.hpp"

namespace qsl_lab {

namespace {

constexpr double kSignTol = 1e-12;

std::size_t sample_count(double T, double samples_per_unit_time) {
  const double per_unit =
      samples_per_unit_time > 0.0 ? samples_per_unit_time : 10000.0 / T;
  const double n = std::ceil(per_unit * T);
  return std::max<std::size_t>(static_cast<std::size_t>(n), 1000) + 1;
}

using ScalarFn = std::function<double(double)>;

// Bisection of a sign change of f on [lo, hi] to 1e-10 in t.
double bisect_sign_change(const ScalarFn& f, double lo, double hi) {
  double flo = f(lo);
  for (int iter = 0; iter < 80 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo < 0.0) == (fm < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// Golden-section minimization on [lo, hi] to 1e-10 in t.
double minimize(const ScalarFn& f, double lo, double hi) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > 1e-10) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  return 0.5 * (a + b);
}

// Scans f over the sampled window, groups samples with f < -kSignTol into
// violation intervals with bisection-refined edges, and records the worst
// sampled value per interval.
void collect_negative_intervals(const ScalarFn& f,
                                const std::vector<double>& times,
                                DivisibilityCondition condition,
                                std::vector<ViolationRecord>& out) {
  const std::size_t n = times.size();
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = f(times[i]);
  }
  auto shifted = [&f](double t) { return f(t) + kSignTol; };

  std::size_t i = 0;
  while (i < n) {
    if (!(values[i] < -kSignTol)) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double worst = values[i];
    while (j + 1 < n && values[j + 1] < -kSignTol) {
      ++j;
      worst = std::min(worst, values[j]);
    }
    double t_lo = times[i];
    if (i > 0) {
      t_lo = bisect_sign_change(shifted, times[i - 1], times[i]);
    }
    double t_hi = times[j];
    if (j + 1 < n) {
      t_hi = bisect_sign_change(shifted, times[j], times[j + 1]);
    }
    out.push_back({condition, t_lo, t_hi, worst});
    i = j + 1;
  }
}

std::vector<double> window_samples(double T, double samples_per_unit_time) {
  const std::size_t n = sample_count(T, samples_per_unit_time);
  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) {
    times[i] = T * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return times;
}

}  // namespace

const char* to_string(DivisibilityClass c) {
  switch (c) {
    case DivisibilityClass::CP_DIVISIBLE:
      return "CP_DIVISIBLE";
    case DivisibilityClass::P_DIVISIBLE_ONLY:
      return "P_DIVISIBLE_ONLY";
    case DivisibilityClass::NON_P_DIVISIBLE:
      return "NON_P_DIVISIBLE";
  }
  return "UNKNOWN";
}

const char* to_string(DivisibilityCondition c) {
  switch (c) {
    case DivisibilityCondition::RATE_SIGN:
      return "RATE_SIGN";
    case DivisibilityCondition::DISSIPATIVITY:
      return "DISSIPATIVITY";
    case DivisibilityCondition::BORDERLINE:
      return "BORDERLINE";
  }
  return "UNKNOWN";
}

CheckResult check_cp_divisible(const RateModel& model, double T,
                               double samples_per_unit_time) {
  if (!(T > 0.0)) {
    throw std::domain_error("check_cp_divisible: T must be > 0");
  }
  const auto times = window_samples(T, samples_per_unit_time);
  CheckResult result;
  const ScalarFn rates[3] = {
      [&model](double t) { return model.gamma1(t); },
      [&model](double t) { return model.gamma2(t); },
      [&model](double t) { return model.gamma3(t); }};
  for (const auto& rate : rates) {
    collect_negative_intervals(rate, times, DivisibilityCondition::RATE_SIGN,
                               result.violations);
  }
  result.passed = result.violations.empty();
  return result;
}

CheckResult check_p_divisible(const RateModel& model, double T,
                              double samples_per_unit_time) {
  if (!(T > 0.0)) {
    throw std::domain_error("check_p_divisible: T must be > 0");
  }
  const auto times = window_samples(T, samples_per_unit_time);
  CheckResult result;

  // Eq.-(10)-style sign conditions on the pumping rates.
  const ScalarFn g1 = [&model](double t) { return model.gamma1(t); };
  const ScalarFn g2 = [&model](double t) { return model.gamma2(t); };
  collect_negative_intervals(g1, times, DivisibilityCondition::RATE_SIGN,
                             result.violations);
  collect_negative_intervals(g2, times, DivisibilityCondition::RATE_SIGN,
                             result.violations);

  // Dissipativity margin; the product is clamped since a negative product
  // is already reported as a rate-sign violation.
  const ScalarFn margin = [&model](double t) {
    const double prod = model.gamma1(t) * model.gamma2(t);
    return std::sqrt(std::max(prod, 0.0)) + 2.0 * model.gamma3(t);
  };
  std::vector<ViolationRecord> dissipativity;
  collect_negative_intervals(margin, times,
                             DivisibilityCondition::DISSIPATIVITY,
                             dissipativity);

  // Borderline: isolated touching zeros of the margin. Sample-level hits
  // and refined local minima both funnel through the stricter rule.
  const double h = 1e-6 * std::max(1.0, T);
  auto borderline_rule_margin = [&](double t) {
    const double tm = std::max(t - h, 0.0);
    const double tp = t + h;
    const double dgamma3 = (model.gamma3(tp) - model.gamma3(tm)) / (tp - tm);
    return dgamma3 - model.gamma3(t) * (model.gamma1(t) + model.gamma2(t));
  };
  std::vector<double> borderline_times;
  std::vector<double> margin_values(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    margin_values[i] = margin(times[i]);
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(margin_values[i]) <= kSignTol) {
      borderline_times.push_back(times[i]);
    }
    if (i > 0 && i + 1 < times.size() &&
        margin_values[i] <= margin_values[i - 1] &&
        margin_values[i] <= margin_values[i + 1] &&
        margin_values[i] > kSignTol) {
      const double t_min = minimize(margin, times[i - 1], times[i + 1]);
      if (std::abs(margin(t_min)) <= kSignTol) {
        borderline_times.push_back(t_min);
      }
    }
  }
  std::sort(borderline_times.begin(), borderline_times.end());
  double last_reported = -1.0;
  for (double t : borderline_times) {
    const bool inside_strict_violation =
        std::any_of(dissipativity.begin(), dissipativity.end(),
                    [t](const ViolationRecord& r) {
                      return t >= r.t_lo && t <= r.t_hi;
                    });
    if (inside_strict_violation) {
      continue;
    }
    const double rule = borderline_rule_margin(t);
    if (rule > 1e-9) {
      if (last_reported >= 0.0 && t - last_reported < 1e-8) {
        continue;
      }
      result.violations.push_back(
          {DivisibilityCondition::BORDERLINE, t, t, rule});
      last_reported = t;
    }
  }

  for (const auto& record : dissipativity) {
    result.violations.push_back(record);
  }
  std::sort(result.violations.begin(), result.violations.end(),
            [](const ViolationRecord& a, const ViolationRecord& b) {
              return a.t_lo < b.t_lo;
            });
  result.passed = result.violations.empty();
  return result;
}

DivisibilityVerdict classify(const RateModel& model, double T,
                             double samples_per_unit_time) {
  const CheckResult cp = check_cp_divisible(model, T, samples_per_unit_time);
  const CheckResult p = check_p_divisible(model, T, samples_per_unit_time);

  DivisibilityVerdict verdict;
  verdict.window_start = 0.0;
  verdict.window_end = T;
  verdict.samples_per_unit_time =
      samples_per_unit_time > 0.0 ? samples_per_unit_time : 10000.0 / T;
  if (cp.passed) {
    verdict.klass = DivisibilityClass::CP_DIVISIBLE;
  } else if (p.passed) {
    verdict.klass = DivisibilityClass::P_DIVISIBLE_ONLY;
    verdict.violations = cp.violations;
  } else {
    verdict.klass = DivisibilityClass::NON_P_DIVISIBLE;
    verdict.violations = p.violations;
    for (const auto& record : cp.violations) {
      verdict.violations.push_back(record);
    }
  }
  return verdict;
}

std::string to_json(const DivisibilityVerdict& verdict) {
  nlohmann::ordered_json j;
  j["class"] = to_string(verdict.klass);
  j["window"] = {verdict.window_start, verdict.window_end};
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& record : verdict.violations) {
    nlohmann::ordered_json v;
    v["condition"] = to_string(record.condition);
    v["t_lo"] = record.t_lo;
    v["t_hi"] = record.t_hi;
    v["worst"] = record.worst;
    j["violations"].push_back(std::move(v));
  }
  j["samples_per_unit_time"] = verdict.samples_per_unit_time;
  return j.dump();
}

double critical_k_scan(const std::function<RateModel(double)>& family,
                       double k_lo, double k_hi, double T) {
  if (!(k_lo < k_hi)) {
    throw std::invalid_argument("critical_k_scan: need k_lo < k_hi");
  }
  const bool p_lo = check_p_divisible(family(k_lo), T).passed;
  const bool p_hi = check_p_divisible(family(k_hi), T).passed;
  if (p_lo == p_hi) {
    throw std::invalid_argument(
        "critical_k_scan: both endpoints classify identically");
  }
  double lo = k_lo, hi = k_hi;
  while (hi - lo > 1e-3) {
    const double mid = 0.5 * (lo + hi);
    if (check_p_divisible(family(mid), T).passed == p_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace qsl_lab

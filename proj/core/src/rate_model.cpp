#include "qsl_lab/rate_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <sstream>

#include "qsl_lab/matrix2.hpp"

namespace qsl_lab {

RateModel::RateModel(std::string name, std::map<std::string, double> params,
                     RateFn omega_h, RateFn gamma1, RateFn gamma2,
                     RateFn gamma3)
    : name_(std::move(name)),
      params_(std::move(params)),
      omega_h_(std::move(omega_h)),
      gamma1_(std::move(gamma1)),
      gamma2_(std::move(gamma2)),
      gamma3_(std::move(gamma3)) {
  if (!omega_h_ || !gamma1_ || !gamma2_ || !gamma3_) {
    throw std::invalid_argument("RateModel: all four rate functions required");
  }
}

double RateModel::eval(const RateFn& f, double t, const char* which) const {
  const double v = f(t);
  if (!std::isfinite(v)) {
    throw NumericalError("rate " + std::string(which) + " of model '" + name_ +
                         "' is not finite at t=" + std::to_string(t));
  }
  return v;
}

namespace {
RateFn zero_fn() {
  return [](double) { return 0.0; };
}
}  // namespace

RateModel cp_oscillating_model(double nu, double omega) {
  if (!(nu > 0.0)) {
    throw std::domain_error("cp_oscillating_model: nu must be > 0");
  }
  if (!(omega >= 0.0)) {
    throw std::domain_error("cp_oscillating_model: omega must be >= 0");
  }
  const double scale = nu / std::sqrt(4.0 * nu * nu + omega * omega);
  auto oscillation = [nu, omega, scale](double t) {
    return scale * (2.0 * nu * std::sin(omega * t) + omega * std::cos(omega * t));
  };
  return RateModel(
      "cp-osc", {{"nu", nu}, {"omega", omega}}, zero_fn(),
      [nu, oscillation](double t) { return nu + oscillation(t); },
      [nu, oscillation](double t) { return nu - oscillation(t); }, zero_fn());
}

RateModel pdiv_crossover_model(double k) {
  if (!(k >= 0.0)) {
    throw std::domain_error("pdiv_crossover_model: k must be >= 0");
  }
  return RateModel(
      "pdiv-crossover", {{"k", k}}, zero_fn(),
      [](double t) { return std::exp(-t / 2.0); },
      [](double t) { return std::exp(-t / 4.0); },
      [k](double t) { return 0.5 * k * std::exp(-3.0 * t / 8.0) * std::cos(2.0 * t); });
}

RateModel sign_violation_model(double k) {
  if (!(k >= 0.0)) {
    throw std::domain_error("sign_violation_model: k must be >= 0");
  }
  auto gamma12 = [k](double t) {
    return std::exp(-t / 2.0) * (k + std::cos(2.0 * t));
  };
  return RateModel("sign-violation", {{"k", k}}, zero_fn(), gamma12, gamma12,
                   [](double t) { return std::exp(-3.0 * t / 8.0); });
}

RateModel amplitude_damping_model(RateFn gamma) {
  return RateModel("amplitude-damping", {}, zero_fn(), zero_fn(),
                   std::move(gamma), zero_fn());
}

RateModel amplitude_damping_model(
    std::vector<std::pair<double, double>> knots) {
  std::vector<double> t, v;
  t.reserve(knots.size());
  v.reserve(knots.size());
  for (const auto& [ti, vi] : knots) {
    t.push_back(ti);
    v.push_back(vi);
  }
  const std::size_t n = t.size();
  TabulatedRates table(std::move(t), std::vector<double>(n, 0.0), std::move(v),
                       std::vector<double>(n, 0.0));
  return RateModel("amplitude-damping", {}, zero_fn(), zero_fn(),
                   [table](double s) { return table.gamma2(s); }, zero_fn());
}

RateModel pure_dephasing_model(RateFn gamma) {
  return RateModel("pure-dephasing", {}, zero_fn(), zero_fn(), zero_fn(),
                   std::move(gamma));
}

TabulatedRates::TabulatedRates(std::vector<double> knots,
                               std::vector<double> gamma1,
                               std::vector<double> gamma2,
                               std::vector<double> gamma3,
                               std::vector<double> omega_h)
    : knots_(std::move(knots)),
      gamma1_(std::move(gamma1)),
      gamma2_(std::move(gamma2)),
      gamma3_(std::move(gamma3)),
      omega_h_(std::move(omega_h)) {
  if (knots_.size() < 2) {
    throw std::invalid_argument("TabulatedRates: need at least 2 knots");
  }
  if (gamma1_.size() != knots_.size() || gamma2_.size() != knots_.size() ||
      gamma3_.size() != knots_.size() ||
      (!omega_h_.empty() && omega_h_.size() != knots_.size())) {
    throw std::invalid_argument("TabulatedRates: column length mismatch");
  }
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    if (!(knots_[i] < knots_[i + 1])) {
      throw std::invalid_argument(
          "TabulatedRates: knots must be strictly increasing");
    }
  }
  auto check_finite = [](const std::vector<double>& col) {
    for (double v : col) {
      if (!std::isfinite(v)) {
        throw std::invalid_argument("TabulatedRates: non-finite value");
      }
    }
  };
  check_finite(knots_);
  check_finite(gamma1_);
  check_finite(gamma2_);
  check_finite(gamma3_);
  check_finite(omega_h_);
}

double TabulatedRates::interpolate(const std::vector<double>& values,
                                   double t) const {
  if (t < knots_.front() || t > knots_.back()) {
    throw std::out_of_range("TabulatedRates: query t=" + std::to_string(t) +
                            " outside [" + std::to_string(knots_.front()) +
                            ", " + std::to_string(knots_.back()) + "]");
  }
  auto hi = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (hi == knots_.end()) {
    return values.back();
  }
  if (hi == knots_.begin()) {
    return values.front();
  }
  const std::size_t i = static_cast<std::size_t>(hi - knots_.begin());
  const double t0 = knots_[i - 1], t1 = knots_[i];
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * values[i - 1] + w * values[i];
}

double TabulatedRates::gamma1(double t) const { return interpolate(gamma1_, t); }
double TabulatedRates::gamma2(double t) const { return interpolate(gamma2_, t); }
double TabulatedRates::gamma3(double t) const { return interpolate(gamma3_, t); }
double TabulatedRates::omega_h(double t) const {
  if (omega_h_.empty()) {
    return 0.0;
  }
  return interpolate(omega_h_, t);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) {
    // trim whitespace and a possible trailing CR
    auto b = field.find_first_not_of(" \t\r");
    auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("rates CSV: bad number '" + s + "' on line " +
                                std::to_string(line_no));
  }
  if (pos != s.size()) {
    throw std::invalid_argument("rates CSV: bad number '" + s + "' on line " +
                                std::to_string(line_no));
  }
  return v;
}

}  // namespace

TabulatedRates TabulatedRates::from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("rates CSV: empty input");
  }
  auto header = split_csv_line(line);
  const std::vector<std::string> base = {"t", "gamma1", "gamma2", "gamma3"};
  bool has_omega = false;
  if (header.size() == 5 && header[4] == "omega") {
    has_omega = true;
  } else if (header.size() != 4) {
    throw std::invalid_argument(
        "rates CSV: expected header t,gamma1,gamma2,gamma3[,omega]");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    if (header[i] != base[i]) {
      throw std::invalid_argument(
          "rates CSV: expected header t,gamma1,gamma2,gamma3[,omega]");
    }
  }

  std::vector<double> t, g1, g2, g3, om;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") {
      continue;
    }
    auto fields = split_csv_line(line);
    if (fields.size() != (has_omega ? 5u : 4u)) {
      throw std::invalid_argument("rates CSV: wrong field count on line " +
                                  std::to_string(line_no));
    }
    t.push_back(parse_double(fields[0], line_no));
    g1.push_back(parse_double(fields[1], line_no));
    g2.push_back(parse_double(fields[2], line_no));
    g3.push_back(parse_double(fields[3], line_no));
    if (has_omega) {
      om.push_back(parse_double(fields[4], line_no));
    }
  }
  return TabulatedRates(std::move(t), std::move(g1), std::move(g2),
                        std::move(g3), std::move(om));
}

TabulatedRates TabulatedRates::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("rates CSV: cannot open " + path);
  }
  return from_csv(in);
}

RateModel rates_from_table(TabulatedRates table) {
  auto shared = std::make_shared<TabulatedRates>(std::move(table));
  return RateModel(
      "tabulated", {{"t_min", shared->t_front()}, {"t_max", shared->t_back()}},
      [shared](double t) { return shared->omega_h(t); },
      [shared](double t) { return shared->gamma1(t); },
      [shared](double t) { return shared->gamma2(t); },
      [shared](double t) { return shared->gamma3(t); });
}

namespace {

double require_param(const std::map<std::string, double>& params,
                     const std::string& key, const std::string& model) {
  auto it = params.find(key);
  if (it == params.end()) {
    throw std::invalid_argument("model '" + model +
                                "' requires parameter --" + key);
  }
  return it->second;
}

std::string known_model_list() {
  std::string s;
  for (const auto& doc : builtin_model_docs()) {
    if (!s.empty()) {
      s += ", ";
    }
    s += doc.name;
  }
  return s;
}

}  // namespace

RateModel model_from_name(const std::string& name,
                          const std::map<std::string, double>& params) {
  if (name == "cp-osc") {
    return cp_oscillating_model(require_param(params, "nu", name),
                                require_param(params, "omega", name));
  }
  if (name == "pdiv-crossover") {
    return pdiv_crossover_model(require_param(params, "k", name));
  }
  if (name == "sign-violation") {
    return sign_violation_model(require_param(params, "k", name));
  }
  if (name == "amplitude-damping") {
    const double g = require_param(params, "gamma", name);
    if (!(g >= 0.0)) {
      throw std::domain_error("amplitude-damping: gamma must be >= 0");
    }
    return RateModel("amplitude-damping", {{"gamma", g}}, zero_fn(), zero_fn(),
                     [g](double) { return g; }, zero_fn());
  }
  if (name == "pure-dephasing") {
    const double g = require_param(params, "gamma", name);
    return RateModel("pure-dephasing", {{"gamma", g}}, zero_fn(), zero_fn(),
                     zero_fn(), [g](double) { return g; });
  }
  throw std::invalid_argument("unknown model '" + name + "'; known models: " +
                              known_model_list());
}

const std::vector<ModelDoc>& builtin_model_docs() {
  static const std::vector<ModelDoc> docs = {
      {"cp-osc", "--nu (> 0), --omega (>= 0)",
       "oscillating populations with nonnegative rates at all times"},
      {"pdiv-crossover", "--k (>= 0)",
       "gamma1=e^{-t/2}, gamma2=e^{-t/4}, gamma3=(k/2)e^{-3t/8}cos(2t); "
       "positivity of intermediate maps is lost at k = 1"},
      {"sign-violation", "--k (>= 0)",
       "gamma1=gamma2=e^{-t/2}(k+cos 2t), gamma3=e^{-3t/8}; rates dip "
       "negative for k < 1"},
      {"amplitude-damping", "--gamma (>= 0)",
       "constant decay of the excited level"},
      {"pure-dephasing", "--gamma", "constant decay of the coherences"},
  };
  return docs;
}

double default_tau_max(const std::string& model_name) {
  return model_name == "cp-osc" ? 3.0 : 10.0;
}

}  // namespace qsl_lab

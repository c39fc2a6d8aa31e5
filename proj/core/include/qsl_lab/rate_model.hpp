#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace qsl_lab {

using RateFn = std::function<double(double)>;

/// The four time functions defining the phase-covariant generator:
/// Hamiltonian coefficient omega_h(t) plus the heating, dissipation and
/// dephasing rates gamma1/2/3(t). Values are checked finite on evaluation.
///
/// Note the symbol split: omega_h is the Hamiltonian coefficient in the
/// generator, `omega` in a parameter map is the oscillation frequency of
/// the cp-osc model. Every built-in model has omega_h == 0.
class RateModel {
 public:
  RateModel(std::string name, std::map<std::string, double> params,
            RateFn omega_h, RateFn gamma1, RateFn gamma2, RateFn gamma3);

  double omega_h(double t) const { return eval(omega_h_, t, "omega_h"); }
  double gamma1(double t) const { return eval(gamma1_, t, "gamma1"); }
  double gamma2(double t) const { return eval(gamma2_, t, "gamma2"); }
  double gamma3(double t) const { return eval(gamma3_, t, "gamma3"); }

  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }

 private:
  double eval(const RateFn& f, double t, const char* which) const;

  std::string name_;
  std::map<std::string, double> params_;
  RateFn omega_h_, gamma1_, gamma2_, gamma3_;
};

/// Oscillating-population model with nonnegative rates at all times:
///   gamma1 = nu + nu (2 nu sin(omega t) + omega cos(omega t)) / sqrt(4 nu^2 + omega^2)
///   gamma2 = nu - the same oscillating term, gamma3 = 0.
/// Requires nu > 0, omega >= 0.
RateModel cp_oscillating_model(double nu, double omega);

/// gamma1 = e^{-t/2}, gamma2 = e^{-t/4}, gamma3 = (k/2) e^{-3t/8} cos(2t).
/// P-divisible for k < 1, not for k >= 1. Requires k >= 0.
RateModel pdiv_crossover_model(double k);

/// gamma1 = gamma2 = e^{-t/2}(k + cos 2t), gamma3 = e^{-3t/8}; the rates
/// themselves go negative when k < 1. Requires k >= 0.
RateModel sign_violation_model(double k);

/// gamma1 = gamma3 = 0, gamma2 = gamma(t).
RateModel amplitude_damping_model(RateFn gamma);
/// Same, with gamma(t) linearly interpolating the given (t, value) knots.
RateModel amplitude_damping_model(std::vector<std::pair<double, double>> knots);

/// gamma1 = gamma2 = 0, gamma3 = gamma(t).
RateModel pure_dephasing_model(RateFn gamma);

/// Strictly increasing knots with sampled rate values; queries interpolate
/// linearly and throw std::out_of_range outside [t_front, t_back].
class TabulatedRates {
 public:
  /// omega_h may be empty (treated as identically zero).
  TabulatedRates(std::vector<double> knots, std::vector<double> gamma1,
                 std::vector<double> gamma2, std::vector<double> gamma3,
                 std::vector<double> omega_h = {});

  /// CSV with header `t,gamma1,gamma2,gamma3` and optional trailing column
  /// `omega`; rows ascending in t.
  static TabulatedRates from_csv(std::istream& in);
  static TabulatedRates from_csv_file(const std::string& path);

  double gamma1(double t) const;
  double gamma2(double t) const;
  double gamma3(double t) const;
  double omega_h(double t) const;

  double t_front() const { return knots_.front(); }
  double t_back() const { return knots_.back(); }
  std::size_t size() const { return knots_.size(); }

 private:
  double interpolate(const std::vector<double>& values, double t) const;

  std::vector<double> knots_;
  std::vector<double> gamma1_, gamma2_, gamma3_, omega_h_;
};

RateModel rates_from_table(TabulatedRates table);

/// Builds a built-in model by CLI name ("cp-osc", "pdiv-crossover",
/// "sign-violation", "amplitude-damping", "pure-dephasing") with its named
/// parameters. Throws std::invalid_argument for unknown names or missing
/// parameters; the message lists the known models.
RateModel model_from_name(const std::string& name,
                          const std::map<std::string, double>& params);

struct ModelDoc {
  std::string name;
  std::string parameters;
  std::string summary;
};
const std::vector<ModelDoc>& builtin_model_docs();

/// Horizon used for figure-style scans when none is given: 3 for cp-osc
/// (the oscillation features sit early), 10 otherwise.
double default_tau_max(const std::string& model_name);

}  // namespace qsl_lab

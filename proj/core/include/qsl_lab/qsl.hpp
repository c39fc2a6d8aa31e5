#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qsl_lab/propagator.hpp"

namespace qsl_lab {

/// Uhlmann fidelity F = Tr[sqrt(sqrt(rho_t) rho_0 sqrt(rho_t))]^2 in the
/// 2x2 closed form; reduces to <phi0|rho_t|phi0> when rho_0 is pure
/// (det rho_0 <= 1e-10).
double fidelity(const DensityMatrix& rho0, const DensityMatrix& rho_t);

/// L = arccos(sqrt(<phi0|rho_t|phi0>)) in [0, pi/2]. Throws
/// std::invalid_argument when rho0 is not pure.
double bures_angle(const DensityMatrix& rho0, const DensityMatrix& rho_t);

/// Largest singular value.
double operator_norm(const ComplexMatrix2& m);

struct QslReport {
  double tau = 0.0;
  double bures_angle = 0.0;
  double lambda_op = 0.0;
  double tau_qsl = 0.0;
  double ratio = 0.0;
};

/// JSON object with fields tau, bures_angle, lambda_op, tau_qsl, ratio.
std::string to_json(const QslReport& report);

/// Time-averaged generator norm (1/tau) int_0^tau ||L_t(rho(t))||_op dt,
/// composite Simpson on the trajectory grid with Richardson refinement
/// (re-propagating at doubled node count) until successive estimates agree
/// to 1e-9 relative. Throws NumericalError when refinement stalls.
double lambda_op(const RateModel& model, const Trajectory& traj);

struct QslOptions {
  std::size_t nodes = 2001;
  double rtol = 1e-10;
  double atol = 1e-12;
};

/// Full pipeline for one (initial state, model, horizon): propagate from
/// pure_state_from_a(a), then tau_qsl = sin^2(L)/Lambda and
/// ratio = tau_qsl/tau. A trajectory that never moves (Lambda and L both
/// zero) reports the degenerate ratio 1.
QslReport qsl_ratio(const RateModel& model, PureStateParam a, double tau,
                    const QslOptions& options = {});

struct BlpReport {
  double n = 0.0;  ///< integrated positive part of d|b|^2/dt
  std::vector<std::pair<double, double>> backflow_intervals;
};

/// BLP non-Markovianity measure for amplitude damping, computed from the
/// excited-level population trace p = |b|^2 with p(0) = 1 (within 1e-9).
/// Rising intervals are located from central differences and their
/// endpoints refined by bisection to 1e-10 in t.
BlpReport blp_measure_ad(std::span<const PopulationSample> population);

/// Model-aware variant: rejects inputs whose gamma1 or gamma3 is nonzero
/// anywhere on the trajectory grid.
BlpReport blp_measure_ad(const RateModel& model, const Trajectory& traj);

struct AmplitudeDampingRatio {
  double printed_form = 0.0;          ///< (1-|b|^2)/(1-|b|+N)
  double total_variation_form = 0.0;  ///< (1-|b|^2)/((1-|b|^2)+2N)
  bool printed_exceeds_bound = false; ///< printed form above 1 + 1e-9
};

/// Both closed-form QSL ratios for amplitude damping. The two forms
/// disagree in general; the qsl_ratio pipeline is the ground truth and the
/// total-variation form is the one consistent with it.
AmplitudeDampingRatio dl_ratio_ad(std::span<const PopulationSample> population,
                                  double n);

}  // namespace qsl_lab

#include "qsl_lab/qsl.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

namespace qsl_lab {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Generator norm along the dense solution; the interpolated matrix is
// re-Hermitized and renormalized before the generator is applied.
class NormAlongSolution {
 public:
  NormAlongSolution(const RateModel& model, const DenseOdeSolution& dense)
      : model_(model), dense_(dense) {}

  double operator()(double t) const {
    ComplexMatrix2 m = hermitize(dense_.eval(t));
    const double tr = m.m00.real() + m.m11.real();
    m = (1.0 / tr) * m;
    return operator_norm(generator_apply_entries(t, m));
  }

 private:
  ComplexMatrix2 generator_apply_entries(double t,
                                         const ComplexMatrix2& rho) const {
    const double g1 = model_.gamma1(t);
    const double g2 = model_.gamma2(t);
    const double g3 = model_.gamma3(t);
    const double wh = model_.omega_h(t);
    const complexd diag = 0.5 * (g1 * rho.m11 - g2 * rho.m00);
    const double damp = 0.25 * (g1 + g2) + g3;
    const complexd rot{0.0, 2.0 * wh};
    return {diag, (-damp - rot) * rho.m01, (-damp + rot) * rho.m10, -diag};
  }

  const RateModel& model_;
  const DenseOdeSolution& dense_;
};

// One grid-cell panel of the composite Simpson rule, refined by halving
// until the Richardson comparison of successive estimates passes the
// panel's share of the tolerance.
template <typename F>
double adaptive_simpson_panel(const F& f, double a, double fa, double b,
                              double fb, double fm, double coarse, double tol,
                              int depth, bool& converged) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double fine = left + right;
  if (std::abs(fine - coarse) <= 15.0 * tol) {
    return fine + (fine - coarse) / 15.0;
  }
  if (depth >= 32) {
    converged = false;
    return fine;
  }
  return adaptive_simpson_panel(f, a, fa, m, fm, flm, left, 0.5 * tol,
                                depth + 1, converged) +
         adaptive_simpson_panel(f, m, fm, b, fb, frm, right, 0.5 * tol,
                                depth + 1, converged);
}

}  // namespace

double fidelity(const DensityMatrix& rho0, const DensityMatrix& rho_t) {
  const ComplexMatrix2& a = rho0.matrix();
  const ComplexMatrix2& b = rho_t.matrix();
  const double overlap = std::real(trace(mul(a, b)));
  if (rho0.is_pure()) {
    return clamp01(overlap);
  }
  const double da = std::max(std::real(det(a)), 0.0);
  const double db = std::max(std::real(det(b)), 0.0);
  return clamp01(overlap + 2.0 * std::sqrt(da * db));
}

double bures_angle(const DensityMatrix& rho0, const DensityMatrix& rho_t) {
  if (!rho0.is_pure()) {
    throw std::invalid_argument("bures_angle: rho0 must be pure");
  }
  const double overlap = fidelity(rho0, rho_t);
  return std::acos(std::sqrt(clamp01(overlap)));
}

double operator_norm(const ComplexMatrix2& m) {
  if (hermiticity_defect(m) <= 1e-10) {
    const auto [hi, lo] = hermitian_eigenvalues(hermitize(m));
    return std::max(std::abs(hi), std::abs(lo));
  }
  // largest eigenvalue of m^dagger m in closed form
  const double t = std::norm(m.m00) + std::norm(m.m01) + std::norm(m.m10) +
                   std::norm(m.m11);
  const double d = std::norm(det(m));
  const double disc = std::max(t * t - 4.0 * d, 0.0);
  return std::sqrt(0.5 * (t + std::sqrt(disc)));
}

std::string to_json(const QslReport& report) {
  nlohmann::ordered_json j;
  j["tau"] = report.tau;
  j["bures_angle"] = report.bures_angle;
  j["lambda_op"] = report.lambda_op;
  j["tau_qsl"] = report.tau_qsl;
  j["ratio"] = report.ratio;
  return j.dump();
}

double lambda_op(const RateModel& model, const Trajectory& traj) {
  if (traj.nodes.size() < 3) {
    throw std::invalid_argument("lambda_op: need at least 3 nodes");
  }
  const double tau = traj.grid.tau();

  // An analytic trajectory carries no interpolant; integrate along a fresh
  // ODE solve instead (the engines agree to 1e-8 by contract).
  std::shared_ptr<const DenseOdeSolution> dense = traj.dense;
  if (!dense) {
    dense = propagate_ode(model, traj.initial(), traj.grid).dense;
  }
  const NormAlongSolution f(model, *dense);

  // First pass on the trajectory grid fixes the tolerance scale.
  double coarse_total = 0.0;
  for (std::size_t i = 0; i + 1 < traj.nodes.size(); ++i) {
    coarse_total += 0.5 * (traj.nodes[i + 1].t - traj.nodes[i].t) *
                    (traj.nodes[i].generator_norm +
                     traj.nodes[i + 1].generator_norm);
  }
  const double tol_total = std::max(1e-9 * std::abs(coarse_total), 1e-15);

  double total = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i + 1 < traj.nodes.size(); ++i) {
    const double a = traj.nodes[i].t;
    const double b = traj.nodes[i + 1].t;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double simpson = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    total += adaptive_simpson_panel(f, a, fa, b, fb, fm, simpson,
                                    tol_total * (b - a) / tau, 0, converged);
  }
  if (!converged) {
    throw NumericalError("lambda_op: grid too coarse to converge");
  }
  return total / tau;
}

QslReport qsl_ratio(const RateModel& model, PureStateParam a, double tau,
                    const QslOptions& options) {
  if (!(tau > 0.0)) {
    throw std::domain_error("qsl_ratio: tau must be > 0");
  }
  const DensityMatrix rho0 = pure_state_from_a(a);
  const TimeGrid grid =
      TimeGrid::uniform(tau, options.nodes, options.rtol, options.atol);
  const Trajectory traj = propagate_ode(model, rho0, grid);

  const double overlap = fidelity(rho0, traj.final_state());
  const double sin2 = std::max(0.0, 1.0 - overlap);
  const double angle = std::acos(std::sqrt(clamp01(overlap)));
  const double lambda = lambda_op(model, traj);

  QslReport report;
  report.tau = tau;
  report.bures_angle = angle;
  report.lambda_op = lambda;
  if (lambda * tau <= 1e-14 && sin2 <= 1e-14) {
    // stationary trajectory: no distance covered and no generator action
    report.tau_qsl = tau;
    report.ratio = 1.0;
  } else {
    report.tau_qsl = sin2 / lambda;
    report.ratio = report.tau_qsl / tau;
  }
  return report;
}

namespace {

void check_population(std::span<const PopulationSample> population) {
  if (population.size() < 3) {
    throw std::invalid_argument("population trace: need at least 3 samples");
  }
  for (std::size_t i = 0; i + 1 < population.size(); ++i) {
    if (!(population[i].t < population[i + 1].t)) {
      throw std::invalid_argument(
          "population trace: times must strictly increase");
    }
  }
  if (std::abs(population.front().p - 1.0) > 1e-9) {
    throw std::invalid_argument(
        "amplitude-damping trace must start from p(0) = 1");
  }
}

// Derivative of the quadratic through samples (c-1, c, c+1) at time t;
// linear in t, so its zero is found exactly by bisection.
double quadratic_derivative(std::span<const PopulationSample> pop,
                            std::size_t c, double t) {
  const double t0 = pop[c - 1].t, t1 = pop[c].t, t2 = pop[c + 1].t;
  const double d0 = (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2));
  const double d1 = (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2));
  const double d2 = (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1));
  return pop[c - 1].p * d0 + pop[c].p * d1 + pop[c + 1].p * d2;
}

// Locates the derivative zero near the turning sample c (a local extremum
// of the sampled trace), bisected to 1e-10 in t. Falls back to the sample
// time when the local quadratic has no sign change there.
double refine_turning_point(std::span<const PopulationSample> pop,
                            std::size_t c) {
  const std::size_t n = pop.size();
  if (c == 0 || c + 1 >= n) {
    return pop[c].t;
  }
  double lo = pop[c - 1].t;
  double hi = pop[c + 1].t;
  double flo = quadratic_derivative(pop, c, lo);
  const double fhi = quadratic_derivative(pop, c, hi);
  if ((flo <= 0.0) == (fhi <= 0.0)) {
    return pop[c].t;
  }
  for (int iter = 0; iter < 80 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double fm = quadratic_derivative(pop, c, mid);
    if ((flo <= 0.0) == (fm <= 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

BlpReport blp_measure_ad(std::span<const PopulationSample> population) {
  check_population(population);
  const std::size_t n = population.size();

  // Sign-partition the grid intervals by the population increments (the
  // central-difference derivative changes sign exactly where a run of
  // positive increments starts or ends); N telescopes to the sum of the
  // run gains.
  BlpReport report;
  std::size_t k = 0;
  while (k + 1 < n) {
    if (!(population[k + 1].p > population[k].p)) {
      ++k;
      continue;
    }
    std::size_t end = k;
    while (end + 1 < n && population[end + 1].p > population[end].p) {
      ++end;
    }
    const double gain = population[end].p - population[k].p;
    if (gain > 1e-12) {
      report.n += gain;
      report.backflow_intervals.emplace_back(
          refine_turning_point(population, k),
          refine_turning_point(population, end));
    }
    k = end;
  }
  return report;
}

BlpReport blp_measure_ad(const RateModel& model, const Trajectory& traj) {
  for (const auto& node : traj.nodes) {
    if (std::abs(model.gamma1(node.t)) > 1e-12 ||
        std::abs(model.gamma3(node.t)) > 1e-12) {
      throw std::invalid_argument(
          "blp_measure_ad: model is not amplitude damping (gamma1 and "
          "gamma3 must vanish)");
    }
  }
  const auto population = excited_population_trace(traj);
  return blp_measure_ad(population);
}

AmplitudeDampingRatio dl_ratio_ad(
    std::span<const PopulationSample> population, double n) {
  check_population(population);
  if (n < 0.0) {
    throw std::invalid_argument("dl_ratio_ad: N must be >= 0");
  }
  const double p_tau = clamp01(population.back().p);
  const double b = std::sqrt(p_tau);
  const double numerator = 1.0 - p_tau;

  AmplitudeDampingRatio out;
  const double printed_den = 1.0 - b + n;
  out.printed_form = numerator == 0.0
                         ? 0.0
                         : numerator / printed_den;
  const double tv_den = numerator + 2.0 * n;
  out.total_variation_form = numerator == 0.0 ? 0.0 : numerator / tv_den;
  out.printed_exceeds_bound = out.printed_form > 1.0 + 1e-9;
  return out;
}

}  // namespace qsl_lab

#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <vector>

#include "qsl_lab/matrix2.hpp"
#include "qsl_lab/rate_model.hpp"
#include "qsl_lab/states.hpp"

namespace qsl_lab {

/// Output grid starting at 0, strictly increasing, endpoint included, with
/// the local error control used by the adaptive integrator.
struct TimeGrid {
  std::vector<double> nodes;
  double rtol = 1e-10;
  double atol = 1e-12;

  static TimeGrid uniform(double tau, std::size_t node_count = 2001,
                          double rtol = 1e-10, double atol = 1e-12);
  double tau() const { return nodes.back(); }
  void validate() const;
};

struct TrajectoryNode {
  double t = 0.0;
  DensityMatrix state;
  ComplexMatrix2 generator;    ///< L_t(rho(t))
  double generator_norm = 0.0; ///< largest singular value of the above
  double fidelity = 1.0;       ///< F(rho(0), rho(t))
};

/// Piecewise-quartic interpolant of an adaptive integration, one segment
/// per accepted step. Lets functionals of the solution (the action
/// integral in particular) evaluate the state between output nodes
/// without re-integrating.
class DenseOdeSolution {
 public:
  /// Raw interpolated matrix at t in [0, t_end]; not re-Hermitized.
  ComplexMatrix2 eval(double t) const;
  double t_end() const { return steps_.empty() ? 0.0 : t_end_; }

  struct Segment {
    double t0 = 0.0;
    double h = 0.0;
    std::array<std::array<double, 8>, 5> coeff{};
  };

  DenseOdeSolution() = default;
  explicit DenseOdeSolution(std::vector<Segment> steps);

 private:
  std::vector<Segment> steps_;
  double t_end_ = 0.0;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<TrajectoryNode> nodes;
  /// Present for ODE-propagated trajectories; null for analytic ones.
  std::shared_ptr<const DenseOdeSolution> dense;

  const DensityMatrix& initial() const { return nodes.front().state; }
  const DensityMatrix& final_state() const { return nodes.back().state; }
};

/// Applies the phase-covariant generator at time t:
///   i omega_h [rho, sigma_z]
///   + (gamma1/2)(sigma_+ rho sigma_- - {sigma_- sigma_+, rho}/2)
///   + (gamma2/2)(sigma_- rho sigma_+ - {sigma_+ sigma_-, rho}/2)
///   + (gamma3/2)(sigma_z rho sigma_z - rho).
/// The output is Hermitian and traceless.
ComplexMatrix2 generator_apply(const RateModel& model, double t,
                               const DensityMatrix& rho);

/// Integrates d rho/dt = L_t(rho) with an adaptive Dormand-Prince 5(4)
/// scheme and dense output at the grid nodes. Emitted states are
/// re-Hermitized and trace-renormalized; if either correction exceeds 1e-8
/// the run fails with NumericalError.
Trajectory propagate_ode(const RateModel& model, const DensityMatrix& rho0,
                         const TimeGrid& grid);

/// Closed-form solution of the Bloch equations for omega_h == 0:
///   z(t) = e^{-G(t)} [ z(0) + int_0^t e^{G(s)} (gamma1-gamma2)/2 ds ],
///   G(t) = int_0^t (gamma1+gamma2)/2 ds,
///   rho01(t) = rho01(0) exp(-int_0^t [(gamma1+gamma2)/4 + gamma3] ds),
/// all integrals by adaptive quadrature to 1e-12. Throws
/// std::invalid_argument if the model has a nonzero omega_h on the grid.
Trajectory propagate_analytic(const RateModel& model,
                              const DensityMatrix& rho0, const TimeGrid& grid);

struct PopulationSample {
  double t = 0.0;
  double p = 0.0;
};

/// Population of the index-0 (excited) level at each node.
std::vector<PopulationSample> excited_population_trace(const Trajectory& traj);

/// Columns: t,rho00,rho01_re,rho01_im,rho11,fidelity,gen_norm
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

}  // namespace qsl_lab

#include "qsl_lab/propagator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "io_util.hpp"
#include "qsl_lab/qsl.hpp"
#include "quadrature.hpp"

namespace qsl_lab {

TimeGrid TimeGrid::uniform(double tau, std::size_t node_count, double rtol,
                           double atol) {
  if (!(tau > 0.0)) {
    throw std::domain_error("TimeGrid: tau must be > 0");
  }
  if (node_count < 2) {
    throw std::invalid_argument("TimeGrid: need at least 2 nodes");
  }
  TimeGrid g;
  g.rtol = rtol;
  g.atol = atol;
  g.nodes.resize(node_count);
  for (std::size_t i = 0; i < node_count; ++i) {
    g.nodes[i] = tau * static_cast<double>(i) /
                 static_cast<double>(node_count - 1);
  }
  g.nodes.back() = tau;
  return g;
}

void TimeGrid::validate() const {
  if (nodes.size() < 2) {
    throw std::invalid_argument("TimeGrid: need at least 2 nodes");
  }
  if (nodes.front() != 0.0) {
    throw std::invalid_argument("TimeGrid: grid must start at t = 0");
  }
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (!(nodes[i] < nodes[i + 1])) {
      throw std::invalid_argument("TimeGrid: nodes must strictly increase");
    }
  }
  if (!(rtol > 0.0) || !(atol > 0.0)) {
    throw std::invalid_argument("TimeGrid: tolerances must be positive");
  }
}

namespace {

struct Rates {
  double omega_h, g1, g2, g3;
};

Rates rates_at(const RateModel& model, double t) {
  return {model.omega_h(t), model.gamma1(t), model.gamma2(t), model.gamma3(t)};
}

// Eq.-structured generator on a raw matrix. Entry-wise form of
//   i wh [rho, sz] + (g1/2) D[s+] + (g2/2) D[s-] + (g3/2)(sz rho sz - rho):
// the commutator only rotates coherences, the s+ dissipator feeds
// population 1 -> 0, the s- dissipator 0 -> 1, and every channel damps the
// coherences at rate (g1+g2)/4 + g3.
ComplexMatrix2 generator_raw(const Rates& r, const ComplexMatrix2& rho) {
  const complexd diag = 0.5 * (r.g1 * rho.m11 - r.g2 * rho.m00);
  const double damp = 0.25 * (r.g1 + r.g2) + r.g3;
  const complexd rot{0.0, 2.0 * r.omega_h};
  return {diag, (-damp - rot) * rho.m01, (-damp + rot) * rho.m10, -diag};
}

using Vec8 = std::array<double, 8>;

Vec8 to_vec(const ComplexMatrix2& m) {
  return {m.m00.real(), m.m00.imag(), m.m01.real(), m.m01.imag(),
          m.m10.real(), m.m10.imag(), m.m11.real(), m.m11.imag()};
}

ComplexMatrix2 from_vec(const Vec8& v) {
  return {{v[0], v[1]}, {v[2], v[3]}, {v[4], v[5]}, {v[6], v[7]}};
}

Vec8 rhs(const RateModel& model, double t, const Vec8& y) {
  return to_vec(generator_raw(rates_at(model, t), from_vec(y)));
}

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0,
                 c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// b - bhat, the embedded 4th-order error weights.
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense-output weights for the quartic interpolant.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

Vec8 eval_segment(const DenseOdeSolution::Segment& seg, double t) {
  const double theta = (t - seg.t0) / seg.h;
  const double om = 1.0 - theta;
  Vec8 y;
  for (int i = 0; i < 8; ++i) {
    y[i] = seg.coeff[0][i] +
           theta * (seg.coeff[1][i] +
                    om * (seg.coeff[2][i] +
                          theta * (seg.coeff[3][i] + om * seg.coeff[4][i])));
  }
  return y;
}

double hairer_initial_step(const RateModel& model, double t0, const Vec8& y0,
                           const Vec8& f0, double rtol, double atol,
                           double t_end) {
  auto scaled_norm = [&](const Vec8& v, const Vec8& ref) {
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double sc = atol + rtol * std::abs(ref[i]);
      const double q = v[i] / sc;
      s += q * q;
    }
    return std::sqrt(s / 8.0);
  };
  const double d0 = scaled_norm(y0, y0);
  const double d1n = scaled_norm(f0, y0);
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  h0 = std::min(h0, t_end - t0);
  Vec8 y1;
  for (int i = 0; i < 8; ++i) {
    y1[i] = y0[i] + h0 * f0[i];
  }
  const Vec8 f1 = rhs(model, t0 + h0, y1);
  Vec8 df;
  for (int i = 0; i < 8; ++i) {
    df[i] = f1[i] - f0[i];
  }
  const double d2 = scaled_norm(df, y0) / h0;
  const double dmax = std::max(d1n, d2);
  double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                            : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, t_end - t0});
}

class Emitter {
 public:
  Emitter(const RateModel& model, const DensityMatrix& rho0,
          std::size_t expected)
      : model_(model), rho0_(rho0) {
    nodes_.reserve(expected);
  }

  void emit(double t, const ComplexMatrix2& raw) {
    const double herm_defect = hermiticity_defect(raw);
    if (herm_defect > 1e-8) {
      throw NumericalError(
          "propagation: hermiticity repair exceeds 1e-8 at t=" +
          std::to_string(t) + " (defect " + std::to_string(herm_defect) + ")");
    }
    ComplexMatrix2 m = hermitize(raw);
    const double tr = m.m00.real() + m.m11.real();
    if (std::abs(tr - 1.0) > 1e-8) {
      throw NumericalError("propagation: trace repair exceeds 1e-8 at t=" +
                           std::to_string(t));
    }
    m = (1.0 / tr) * m;
    auto validated = validate_density(m);
    if (!validated.state) {
      throw NumericalError("propagation: invalid state at t=" +
                           std::to_string(t) + ": " +
                           validated.diagnostics.describe());
    }
    const ComplexMatrix2 gen = generator_raw(rates_at(model_, t), m);
    nodes_.push_back(TrajectoryNode{t, *validated.state, gen,
                                    operator_norm(gen),
                                    fidelity(rho0_, *validated.state)});
  }

  std::vector<TrajectoryNode> take() { return std::move(nodes_); }

 private:
  const RateModel& model_;
  DensityMatrix rho0_;
  std::vector<TrajectoryNode> nodes_;
};

}  // namespace

DenseOdeSolution::DenseOdeSolution(std::vector<Segment> steps)
    : steps_(std::move(steps)) {
  if (!steps_.empty()) {
    t_end_ = steps_.back().t0 + steps_.back().h;
  }
}

ComplexMatrix2 DenseOdeSolution::eval(double t) const {
  if (steps_.empty()) {
    throw std::logic_error("DenseOdeSolution: empty");
  }
  if (t < steps_.front().t0 - 1e-12 || t > t_end_ + 1e-12 * std::max(1.0, t_end_)) {
    throw std::out_of_range("DenseOdeSolution: t outside the solved range");
  }
  // first segment whose start lies beyond t, then step back one
  auto it = std::upper_bound(
      steps_.begin(), steps_.end(), t,
      [](double value, const Segment& seg) { return value < seg.t0; });
  const Segment& seg = it == steps_.begin() ? steps_.front() : *(it - 1);
  return from_vec(eval_segment(seg, std::clamp(t, seg.t0, seg.t0 + seg.h)));
}

ComplexMatrix2 generator_apply(const RateModel& model, double t,
                               const DensityMatrix& rho) {
  return generator_raw(rates_at(model, t), rho.matrix());
}

Trajectory propagate_ode(const RateModel& model, const DensityMatrix& rho0,
                         const TimeGrid& grid) {
  grid.validate();
  const double t_end = grid.tau();
  const double rtol = grid.rtol;
  const double atol = grid.atol;

  Emitter emitter(model, rho0, grid.nodes.size());
  emitter.emit(0.0, rho0.matrix());
  std::size_t next_node = 1;
  std::vector<DenseOdeSolution::Segment> segments;
  segments.reserve(256);

  double t = 0.0;
  Vec8 y = to_vec(rho0.matrix());
  Vec8 k1 = rhs(model, t, y);
  double h = hairer_initial_step(model, t, y, k1, rtol, atol, t_end);

  const double t_eps = 1e-14 * std::max(1.0, t_end);
  std::size_t step_count = 0;
  while (t < t_end - t_eps) {
    if (++step_count > 10'000'000) {
      throw NumericalError("propagate_ode: step limit exceeded");
    }
    if (h < 4.0 * 2.22e-16 * std::max(std::abs(t), 1.0)) {
      throw NumericalError("propagate_ode: step size underflow at t=" +
                           std::to_string(t));
    }
    h = std::min(h, t_end - t);

    Vec8 y2, y3, y4, y5, y6, y7;
    for (int i = 0; i < 8; ++i) {
      y2[i] = y[i] + h * a21 * k1[i];
    }
    const Vec8 k2 = rhs(model, t + c2 * h, y2);
    for (int i = 0; i < 8; ++i) {
      y3[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    }
    const Vec8 k3 = rhs(model, t + c3 * h, y3);
    for (int i = 0; i < 8; ++i) {
      y4[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    }
    const Vec8 k4 = rhs(model, t + c4 * h, y4);
    for (int i = 0; i < 8; ++i) {
      y5[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                          a54 * k4[i]);
    }
    const Vec8 k5 = rhs(model, t + c5 * h, y5);
    for (int i = 0; i < 8; ++i) {
      y6[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                          a64 * k4[i] + a65 * k5[i]);
    }
    const Vec8 k6 = rhs(model, t + h, y6);
    for (int i = 0; i < 8; ++i) {
      y7[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                          b6 * k6[i]);
    }
    const Vec8 k7 = rhs(model, t + h, y7);  // FSAL

    double err = 0.0;
    for (int i = 0; i < 8; ++i) {
      const double yerr = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                               e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      const double sc =
          atol + rtol * std::max(std::abs(y[i]), std::abs(y7[i]));
      const double q = yerr / sc;
      err += q * q;
    }
    err = std::sqrt(err / 8.0);

    if (err <= 1.0) {
      DenseOdeSolution::Segment dense;
      dense.t0 = t;
      dense.h = h;
      for (int i = 0; i < 8; ++i) {
        const double ydiff = y7[i] - y[i];
        const double bspl = h * k1[i] - ydiff;
        dense.coeff[0][i] = y[i];
        dense.coeff[1][i] = ydiff;
        dense.coeff[2][i] = bspl;
        dense.coeff[3][i] = ydiff - h * k7[i] - bspl;
        dense.coeff[4][i] =
            h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                 d6 * k6[i] + d7 * k7[i]);
      }
      const double t_new = t + h;
      while (next_node < grid.nodes.size() &&
             grid.nodes[next_node] <= t_new + t_eps) {
        const double tn = std::min(grid.nodes[next_node], t_new);
        emitter.emit(grid.nodes[next_node], from_vec(eval_segment(dense, tn)));
        ++next_node;
      }
      segments.push_back(dense);
      t = t_new;
      y = y7;
      k1 = k7;
      const double fac =
          err == 0.0 ? 5.0
                     : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h *= fac;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.2, 1.0);
    }
  }
  while (next_node < grid.nodes.size()) {
    // only possible if the loop exited exactly on t_end with pending nodes
    emitter.emit(grid.nodes[next_node], from_vec(y));
    ++next_node;
  }

  Trajectory traj;
  traj.grid = grid;
  traj.nodes = emitter.take();
  traj.dense = std::make_shared<DenseOdeSolution>(std::move(segments));
  return traj;
}

Trajectory propagate_analytic(const RateModel& model,
                              const DensityMatrix& rho0,
                              const TimeGrid& grid) {
  grid.validate();
  for (std::size_t i = 0; i + 1 < grid.nodes.size(); ++i) {
    const double mid = 0.5 * (grid.nodes[i] + grid.nodes[i + 1]);
    if (model.omega_h(grid.nodes[i]) != 0.0 || model.omega_h(mid) != 0.0 ||
        model.omega_h(grid.nodes[i + 1]) != 0.0) {
      throw std::invalid_argument(
          "propagate_analytic requires omega_h == 0 on the grid");
    }
  }

  auto half_sum = [&model](double s) {
    return 0.5 * (model.gamma1(s) + model.gamma2(s));
  };
  auto half_diff = [&model](double s) {
    return 0.5 * (model.gamma1(s) - model.gamma2(s));
  };
  auto coherence_rate = [&model](double s) {
    return 0.25 * (model.gamma1(s) + model.gamma2(s)) + model.gamma3(s);
  };

  Emitter emitter(model, rho0, grid.nodes.size());
  emitter.emit(0.0, rho0.matrix());

  double z = rho0.p00() - rho0.p11();
  complexd c = rho0.coherence();

  for (std::size_t i = 0; i + 1 < grid.nodes.size(); ++i) {
    const double ta = grid.nodes[i];
    const double tb = grid.nodes[i + 1];
    const double dgamma =
        detail::adaptive_quadrature(half_sum, ta, tb, 1e-12);
    // inhomogeneous part, weighted so no exponent ever exceeds |dgamma|
    auto driven = [&](double s) {
      const double partial =
          detail::adaptive_quadrature(half_sum, ta, s, 1e-13);
      return std::exp(partial - dgamma) * half_diff(s);
    };
    const double pumped = detail::adaptive_quadrature(driven, ta, tb, 1e-12);
    z = std::exp(-dgamma) * z + pumped;

    const double perp =
        detail::adaptive_quadrature(coherence_rate, ta, tb, 1e-12);
    c *= std::exp(-perp);

    ComplexMatrix2 m{{0.5 * (1.0 + z), 0.0}, c, std::conj(c),
                     {0.5 * (1.0 - z), 0.0}};
    emitter.emit(tb, m);
  }

  Trajectory traj;
  traj.grid = grid;
  traj.nodes = emitter.take();
  return traj;
}

std::vector<PopulationSample> excited_population_trace(
    const Trajectory& traj) {
  std::vector<PopulationSample> out;
  out.reserve(traj.nodes.size());
  for (const auto& node : traj.nodes) {
    out.push_back({node.t, node.state.p00()});
  }
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  std::string line;
  out << "t,rho00,rho01_re,rho01_im,rho11,fidelity,gen_norm\n";
  for (const auto& node : traj.nodes) {
    line.clear();
    const ComplexMatrix2& m = node.state.matrix();
    detail::append_double(line, node.t);
    line += ',';
    detail::append_double(line, m.m00.real());
    line += ',';
    detail::append_double(line, m.m01.real());
    line += ',';
    detail::append_double(line, m.m01.imag());
    line += ',';
    detail::append_double(line, m.m11.real());
    line += ',';
    detail::append_double(line, node.fidelity);
    line += ',';
    detail::append_double(line, node.generator_norm);
    line += '\n';
    out << line;
  }
}

}  // namespace qsl_lab

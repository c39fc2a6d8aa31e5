#include "qsl_lab/scan.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <mutex>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "io_util.hpp"
#include "qsl_lab/propagator.hpp"

#ifndef QSL_LAB_VERSION_STRING
#define QSL_LAB_VERSION_STRING "0.0.0"
#endif

namespace qsl_lab {

namespace {

unsigned resolve_threads(unsigned requested) {
  if (requested > 0) {
    return requested;
  }
  if (const char* env = std::getenv("QSL_LAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) {
      return static_cast<unsigned>(v);
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ScanResult qsl_surface_scan(const ScanConfig& config) {
  if (config.a_count == 0 || config.tau_count == 0) {
    throw std::invalid_argument("scan: grids must be non-empty");
  }
  ScanConfig cfg = config;
  if (cfg.tau_max <= 0.0) {
    cfg.tau_max = default_tau_max(cfg.model);
  }
  const RateModel model = model_from_name(cfg.model, cfg.params);

  ScanResult result;
  result.config = cfg;
  result.artifact_version = QSL_LAB_VERSION_STRING;
  result.timestamp = utc_timestamp();

  result.a_grid.resize(cfg.a_count);
  for (std::size_t i = 0; i < cfg.a_count; ++i) {
    result.a_grid[i] =
        cfg.a_count == 1
            ? 0.0
            : static_cast<double>(i) / static_cast<double>(cfg.a_count - 1);
  }
  result.tau_grid.resize(cfg.tau_count);
  for (std::size_t j = 0; j < cfg.tau_count; ++j) {
    result.tau_grid[j] = cfg.tau_max * static_cast<double>(j + 1) /
                         static_cast<double>(cfg.tau_count);
  }

  const std::size_t cell_count = cfg.a_count * cfg.tau_count;
  result.rows.resize(cell_count);

  const QslOptions options{cfg.nodes, cfg.rtol, cfg.atol};
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::string failure;

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= cell_count) {
        return;
      }
      {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure.empty()) {
          return;
        }
      }
      const std::size_t i = idx / cfg.tau_count;
      const std::size_t j = idx % cfg.tau_count;
      const double a = result.a_grid[i];
      const double tau = result.tau_grid[j];
      try {
        const QslReport report =
            qsl_ratio(model, PureStateParam(a), tau, options);
        result.rows[idx] =
            ScanRow{a, tau, report.ratio, report.bures_angle,
                    report.lambda_op};
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure.empty()) {
          failure = "scan failed at grid point a=" +
                    detail::format_double(a) +
                    ", tau=" + detail::format_double(tau) + ": " + e.what();
        }
        return;
      }
    }
  };

  const unsigned width =
      std::min<unsigned>(resolve_threads(cfg.threads),
                         static_cast<unsigned>(cell_count));
  if (width <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(width);
    for (unsigned w = 0; w < width; ++w) {
      pool.emplace_back(worker);
    }
    for (auto& th : pool) {
      th.join();
    }
  }
  if (!failure.empty()) {
    throw NumericalError(failure);
  }

  result.verdict = classify(model, 20.0);
  return result;
}

void write_scan_csv(const ScanResult& result, std::ostream& out) {
  out << "a,tau,ratio,bures_angle,lambda_op\n";
  std::string line;
  for (const auto& row : result.rows) {
    line.clear();
    detail::append_double(line, row.a);
    line += ',';
    detail::append_double(line, row.tau);
    line += ',';
    detail::append_double(line, row.ratio);
    line += ',';
    detail::append_double(line, row.bures_angle);
    line += ',';
    detail::append_double(line, row.lambda_op);
    line += '\n';
    out << line;
  }
}

std::string scan_provenance_json(const ScanResult& result) {
  nlohmann::ordered_json j;
  j["artifact_version"] = result.artifact_version;
  j["timestamp"] = result.timestamp;
  j["model"] = result.config.model;
  j["params"] = result.config.params;
  j["a_count"] = result.config.a_count;
  j["tau_count"] = result.config.tau_count;
  j["tau_max"] = result.config.tau_max;
  j["nodes"] = result.config.nodes;
  j["rtol"] = result.config.rtol;
  j["atol"] = result.config.atol;
  j["threads"] = result.config.threads;
  j["output_path"] = result.config.output_path;
  j["divisibility"] = nlohmann::ordered_json::parse(to_json(result.verdict));
  return j.dump();
}

std::vector<PanelRow> trajectory_panel(const RateModel& model,
                                       PureStateParam a, double tau,
                                       std::size_t node_count, double rtol,
                                       double atol) {
  const DensityMatrix rho0 = pure_state_from_a(a);
  const TimeGrid grid = TimeGrid::uniform(tau, node_count, rtol, atol);
  const Trajectory traj = propagate_ode(model, rho0, grid);

  std::vector<PanelRow> rows;
  rows.reserve(traj.nodes.size());
  double running_integral = 0.0;
  for (std::size_t i = 0; i < traj.nodes.size(); ++i) {
    const auto& node = traj.nodes[i];
    if (i > 0) {
      const auto& prev = traj.nodes[i - 1];
      running_integral += 0.5 * (node.t - prev.t) *
                          (node.generator_norm + prev.generator_norm);
    }
    const double sin2 = std::max(0.0, 1.0 - node.fidelity);
    PanelRow row;
    row.t = node.t;
    row.p0 = node.state.p00();
    row.p1 = node.state.p11();
    row.coh_abs = std::abs(node.state.coherence());
    row.fidelity = node.fidelity;
    if (running_integral <= 1e-14 && sin2 <= 1e-14) {
      row.qsl_ratio_running = 1.0;
    } else {
      row.qsl_ratio_running = sin2 / running_integral;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_panel_csv(const std::vector<PanelRow>& rows, std::ostream& out) {
  out << "t,p0,p1,coh_abs,fidelity,qsl_ratio_running\n";
  std::string line;
  for (const auto& row : rows) {
    line.clear();
    detail::append_double(line, row.t);
    line += ',';
    detail::append_double(line, row.p0);
    line += ',';
    detail::append_double(line, row.p1);
    line += ',';
    detail::append_double(line, row.coh_abs);
    line += ',';
    detail::append_double(line, row.fidelity);
    line += ',';
    detail::append_double(line, row.qsl_ratio_running);
    line += '\n';
    out << line;
  }
}

ScanComparison compare_scans(const ScanResult& a, const ScanResult& b) {
  if (a.a_grid != b.a_grid || a.tau_grid != b.tau_grid) {
    throw std::invalid_argument("compare_scans: grids differ");
  }
  if (a.rows.size() != b.rows.size()) {
    throw std::invalid_argument("compare_scans: row counts differ");
  }
  ScanComparison cmp;
  cmp.ratio_diff.resize(a.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const double ra = a.rows[i].ratio;
    const double rb = b.rows[i].ratio;
    const double diff = rb - ra;
    cmp.ratio_diff[i] = diff;
    cmp.max_abs_diff = std::max(cmp.max_abs_diff, std::abs(diff));
    const bool optimal_a = std::abs(ra - 1.0) <= kOptimalRatioTol;
    const bool optimal_b = std::abs(rb - 1.0) <= kOptimalRatioTol;
    if (optimal_a && !optimal_b) {
      ++cmp.optimal_only_in_a;
    }
    if (optimal_b && !optimal_a) {
      ++cmp.optimal_only_in_b;
    }
    if (!optimal_a || !optimal_b) {
      cmp.max_abs_diff_subunity =
          std::max(cmp.max_abs_diff_subunity, std::abs(diff));
    }
  }
  return cmp;
}

}  // namespace qsl_lab

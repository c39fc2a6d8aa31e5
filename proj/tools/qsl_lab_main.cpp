// qsl-lab: simulate phase-covariant qubit dynamics, compute quantum speed
// limit reports and surface scans, and classify the divisibility of the
// dynamical map from its rate functions.

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qsl_lab/divisibility.hpp"
#include "qsl_lab/propagator.hpp"
#include "qsl_lab/qsl.hpp"
#include "qsl_lab/rate_model.hpp"
#include "qsl_lab/scan.hpp"

#ifndef QSL_LAB_VERSION_STRING
#define QSL_LAB_VERSION_STRING "0.0.0"
#endif

namespace {

struct ModelCli {
  std::string name;
  std::string table_path;
  double nu = 0.0, omega = 0.0, k = 0.0, gamma = 0.0;
  CLI::Option* nu_opt = nullptr;
  CLI::Option* omega_opt = nullptr;
  CLI::Option* k_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model", name,
                    "built-in model name, or 'table' with --table")
        ->required();
    cmd->add_option("--table", table_path,
                    "CSV rate table (t,gamma1,gamma2,gamma3[,omega])");
    nu_opt = cmd->add_option("--nu", nu, "cp-osc rate scale");
    omega_opt = cmd->add_option("--omega", omega, "cp-osc oscillation frequency");
    k_opt = cmd->add_option("--k", k, "family parameter");
    gamma_opt = cmd->add_option("--gamma", gamma, "constant rate");
  }

  qsl_lab::RateModel build() const {
    if (name == "table" || name == "tabulated") {
      if (table_path.empty()) {
        throw std::invalid_argument("model 'table' requires --table PATH");
      }
      return qsl_lab::rates_from_table(
          qsl_lab::TabulatedRates::from_csv_file(table_path));
    }
    std::map<std::string, double> params;
    if (nu_opt && nu_opt->count()) params["nu"] = nu;
    if (omega_opt && omega_opt->count()) params["omega"] = omega;
    if (k_opt && k_opt->count()) params["k"] = k;
    if (gamma_opt && gamma_opt->count()) params["gamma"] = gamma;
    return qsl_lab::model_from_name(name, params);
  }

  std::map<std::string, double> given_params() const {
    std::map<std::string, double> params;
    if (nu_opt && nu_opt->count()) params["nu"] = nu;
    if (omega_opt && omega_opt->count()) params["omega"] = omega;
    if (k_opt && k_opt->count()) params["k"] = k;
    if (gamma_opt && gamma_opt->count()) params["gamma"] = gamma;
    return params;
  }
};

// Writes to the named file, or to stdout for "-".
int with_output(const std::string& path, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(std::cout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot open output file " + path);
  }
  fn(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phase-covariant qubit dynamics, quantum speed limits and "
               "divisibility classification"};
  app.set_version_flag("--version", QSL_LAB_VERSION_STRING);
  app.require_subcommand(1);

  // --- simulate -----------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "trajectory panel: populations, |coherence|, fidelity and "
                  "the running QSL ratio");
  ModelCli sim_model;
  sim_model.attach(simulate);
  double sim_a = 1.0, sim_tau = 1.0, sim_rtol = 1e-10, sim_atol = 1e-12;
  std::size_t sim_nodes = 2001;
  std::string sim_out = "-";
  simulate->add_option("--a", sim_a, "initial-state parameter in [0,1]")
      ->required();
  simulate->add_option("--tau", sim_tau, "horizon (> 0)")->required();
  simulate->add_option("--nodes", sim_nodes, "output nodes");
  simulate->add_option("--rtol", sim_rtol, "integrator relative tolerance");
  simulate->add_option("--atol", sim_atol, "integrator absolute tolerance");
  simulate->add_option("--out", sim_out, "output CSV path, '-' for stdout");
  simulate->set_config("--config");

  // --- qsl ----------------------------------------------------------------
  auto* qsl_cmd = app.add_subcommand(
      "qsl", "single QSL report as JSON: tau, bures_angle, lambda_op, "
             "tau_qsl, ratio");
  ModelCli qsl_model;
  qsl_model.attach(qsl_cmd);
  double qsl_a = 1.0, qsl_tau = 1.0, qsl_rtol = 1e-10, qsl_atol = 1e-12;
  std::size_t qsl_nodes = 2001;
  qsl_cmd->add_option("--a", qsl_a, "initial-state parameter in [0,1]")
      ->required();
  qsl_cmd->add_option("--tau", qsl_tau, "horizon (> 0)")->required();
  qsl_cmd->add_option("--nodes", qsl_nodes, "trajectory output nodes");
  qsl_cmd->add_option("--rtol", qsl_rtol, "integrator relative tolerance");
  qsl_cmd->add_option("--atol", qsl_atol, "integrator absolute tolerance");
  qsl_cmd->set_config("--config");

  // --- scan ---------------------------------------------------------------
  auto* scan = app.add_subcommand(
      "scan", "QSL ratio surface over the (a, tau) grid, CSV output");
  ModelCli scan_model;
  scan_model.attach(scan);
  qsl_lab::ScanConfig scan_cfg;
  std::string scan_out = "-";
  scan->add_option("--a-count", scan_cfg.a_count, "a-grid size over [0,1]");
  scan->add_option("--tau-count", scan_cfg.tau_count,
                   "tau-grid size over (0, tau-max]");
  scan->add_option("--tau-max", scan_cfg.tau_max,
                   "largest horizon (default per model: 3 for cp-osc, 10 "
                   "otherwise)");
  scan->add_option("--nodes", scan_cfg.nodes, "trajectory nodes per cell");
  scan->add_option("--rtol", scan_cfg.rtol, "integrator relative tolerance");
  scan->add_option("--atol", scan_cfg.atol, "integrator absolute tolerance");
  scan->add_option("--threads", scan_cfg.threads,
                   "worker threads (0: QSL_LAB_THREADS or hardware width)");
  scan->add_option("--out", scan_out, "output CSV path, '-' for stdout");
  scan->set_config("--config");

  // --- classify -----------------------------------------------------------
  auto* classify_cmd = app.add_subcommand(
      "classify", "divisibility verdict for the model over [0, horizon]");
  ModelCli cls_model;
  cls_model.attach(classify_cmd);
  double horizon = 20.0, samples_per_unit = 0.0;
  classify_cmd->add_option("--horizon", horizon, "window end (> 0)");
  classify_cmd->add_option("--samples-per-unit", samples_per_unit,
                           "sampling density (0: 10000 per window)");
  classify_cmd->set_config("--config");

  // --- models -------------------------------------------------------------
  auto* models_cmd =
      app.add_subcommand("models", "list built-in models and parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*simulate) {
      const auto model = sim_model.build();
      const auto rows = qsl_lab::trajectory_panel(
          model, qsl_lab::PureStateParam(sim_a), sim_tau, sim_nodes,
          sim_rtol, sim_atol);
      return with_output(sim_out, [&rows](std::ostream& out) {
        qsl_lab::write_panel_csv(rows, out);
      });
    }
    if (*qsl_cmd) {
      const auto model = qsl_model.build();
      const auto report =
          qsl_lab::qsl_ratio(model, qsl_lab::PureStateParam(qsl_a), qsl_tau,
                             {qsl_nodes, qsl_rtol, qsl_atol});
      std::cout << qsl_lab::to_json(report) << "\n";
      return 0;
    }
    if (*scan) {
      scan_cfg.model = scan_model.name;
      scan_cfg.params = scan_model.given_params();
      scan_cfg.output_path = scan_out;
      const auto result = qsl_lab::qsl_surface_scan(scan_cfg);
      std::cerr << qsl_lab::scan_provenance_json(result) << "\n";
      return with_output(scan_out, [&result](std::ostream& out) {
        qsl_lab::write_scan_csv(result, out);
      });
    }
    if (*classify_cmd) {
      const auto model = cls_model.build();
      const auto verdict = qsl_lab::classify(model, horizon, samples_per_unit);
      std::cout << qsl_lab::to_json(verdict) << "\n";
      return 0;
    }
    if (*models_cmd) {
      for (const auto& doc : qsl_lab::builtin_model_docs()) {
        std::cout << doc.name << "\n  parameters: " << doc.parameters
                  << "\n  " << doc.summary << "\n";
      }
      std::cout << "table\n  parameters: --table PATH\n  rates linearly "
                   "interpolated from a CSV table\n";
      return 0;
    }
  } catch (const qsl_lab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

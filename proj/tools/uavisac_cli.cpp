#include "uavisac/driver.hpp"
#include "uavisac/report_io.hpp"
#include "uavisac/scenario.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <thread>

namespace {

using namespace uavisac;

bool log_enabled() {
  const char* v = std::getenv("UAVISAC_LOG");
  return v != nullptr && *v != '\0' && std::string(v) != "0";
}

void log_report(const drv::RunReport& rep) {
  if (!log_enabled()) return;
  std::cerr << "algo=" << drv::to_string(rep.algo) << " iters=" << rep.iterations.size()
            << " eta_initial=" << rep.eta_initial << " eta_final=" << rep.eta_final
            << " termination=" << rep.termination << "\n";
  for (const auto& it : rep.iterations) {
    std::cerr << "  iter " << it.index << " objective=" << it.objective
              << " eta=" << it.eta << " max_violation=" << it.max_violation << "\n";
  }
}

struct RunArgs {
  std::string config, out;
  std::string algo = "proposed";
  int max_iters = 100;
  double tol = 0;
  unsigned seed = 0;  // reserved; the pipeline is deterministic
};

int do_run(const RunArgs& a) {
  ScenarioConfig cfg = load_scenario(a.config);
  drv::Algo algo = drv::algo_from_string(a.algo);
  drv::RunSettings settings;
  settings.max_iters = a.max_iters;
  settings.tol = a.tol;
  drv::RunReport rep = drv::run(cfg, algo, settings);
  io::write_run_outputs(a.out, cfg, rep);
  log_report(rep);
  std::cout << "eta_final=" << rep.eta_final << " termination=" << rep.termination
            << " outputs=" << a.out << "\n";
  return 0;
}

struct SweepArgs {
  std::string config, out, param;
  std::string algo = "proposed";
  std::vector<double> values;
  int max_iters = 100;
  double tol = 0;
  unsigned jobs = 0;
};

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, const std::string& param,
                                 double v) {
  ScenarioConfig cfg = base;
  if (param == "T") {
    double delta = base.slot_seconds();
    double slots = v / delta;
    long rounded = std::lround(slots);
    if (rounded < 1 || std::fabs(slots - double(rounded)) > 1e-6 * std::max(1.0, slots))
      throw std::invalid_argument("T sweep values must be integer multiples of the slot length");
    cfg.period_s = v;
    cfg.num_slots = int(rounded);
  } else if (param == "gamma_th") {
    cfg.sensing_threshold = v;
  } else if (param == "p_uav") {
    cfg.uav_power_cap_w = v;
  } else {
    throw std::invalid_argument("unknown sweep parameter: " + param);
  }
  validate(cfg);
  return cfg;
}

int do_sweep(const SweepArgs& a) {
  ScenarioConfig base = load_scenario(a.config);
  drv::Algo algo = drv::algo_from_string(a.algo);
  drv::RunSettings settings;
  settings.max_iters = a.max_iters;
  settings.tol = a.tol;
  if (a.values.empty()) throw std::invalid_argument("sweep needs at least one value");

  auto job = [&](double v) {
    io::SweepRow row;
    row.value = v;
    try {
      ScenarioConfig cfg = apply_sweep_value(base, a.param, v);
      drv::RunReport rep = drv::run(cfg, algo, settings);
      row.eta_final = rep.eta_final;
      row.eta_rectified_exact = rep.eta_rectified_exact;
      row.min_volume_bits = rep.min_volume_final;
      row.iterations = int(rep.iterations.size());
      row.termination = rep.termination;
      row.wall_ms = rep.wall_ms_total;
      double slack = opt::kInf;
      for (double s : rep.audit_bound.min_radar_sinr_per_slot)
        slack = std::min(slack, s / cfg.sensing_threshold - 1.0);
      row.min_echo_slack = rep.audit_bound.min_radar_sinr_per_slot.empty() ? 0 : slack;
    } catch (const drv::InfeasibleScenario&) {
      row.feasible_start = false;
      row.termination = "infeasible";
      row.eta_final = opt::kInf;
      row.eta_rectified_exact = opt::kInf;
    }
    return row;
  };

  unsigned jobs = a.jobs ? a.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::vector<io::SweepRow> rows(a.values.size());
  for (size_t start = 0; start < a.values.size(); start += jobs) {
    size_t stop = std::min(a.values.size(), start + jobs);
    std::vector<std::future<io::SweepRow>> batch;
    for (size_t i = start; i < stop; ++i)
      batch.push_back(std::async(std::launch::async, job, a.values[i]));
    for (size_t i = start; i < stop; ++i) rows[i] = batch[i - start].get();
  }

  std::filesystem::create_directories(a.out);
  io::write_sweep_csv(a.out + "/sweep.csv", a.param, rows);
  for (const auto& r : rows)
    std::cout << a.param << "=" << r.value << " eta_final=" << r.eta_final
              << " termination=" << r.termination << "\n";
  return 0;
}

int do_fit(const std::string& pairs_path) {
  std::ifstream in(pairs_path);
  if (!in) throw std::invalid_argument("cannot open pairs file: " + pairs_path);
  std::vector<std::pair<double, double>> pairs;
  std::string line;
  while (std::getline(in, line)) {
    double c = 0, e = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &c, &e) == 2) pairs.emplace_back(c, e);
  }
  SurrogateFit fit = fit_error_surrogate(pairs);
  std::cout << "{\"a\": " << fit.a << ", \"b\": " << fit.b << "}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV sensing and data-collection trajectory/allocation optimizer"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run_cmd = app.add_subcommand("run", "optimize one scenario");
  run_cmd->add_option("--config", run_args.config, "scenario JSON path")->required();
  run_cmd->add_option("--algo", run_args.algo, "proposed | tmax | constp");
  run_cmd->add_option("--out", run_args.out, "output directory")->required();
  run_cmd->add_option("--max-iters", run_args.max_iters, "outer iteration cap");
  run_cmd->add_option("--tol", run_args.tol, "stopping tolerance (0 = config value)");
  run_cmd->add_option("--seed", run_args.seed, "reserved, accepted for reproducibility");

  SweepArgs sweep_args;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "re-optimize over a parameter range");
  sweep_cmd->add_option("--config", sweep_args.config, "scenario JSON path")->required();
  sweep_cmd->add_option("--algo", sweep_args.algo, "proposed | tmax | constp");
  sweep_cmd->add_option("--param", sweep_args.param, "T | gamma_th | p_uav")->required();
  sweep_cmd->add_option("--values", sweep_args.values, "comma separated values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--out", sweep_args.out, "output directory")->required();
  sweep_cmd->add_option("--max-iters", sweep_args.max_iters, "outer iteration cap");
  sweep_cmd->add_option("--tol", sweep_args.tol, "stopping tolerance (0 = config value)");
  sweep_cmd->add_option("--jobs", sweep_args.jobs, "parallel runs (0 = hardware)");

  std::string pairs_path;
  CLI::App* fit_cmd = app.add_subcommand("fit", "fit the error-vs-samples power law");
  fit_cmd->add_option("--pairs", pairs_path, "CSV of count,error rows")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run_cmd->parsed()) return do_run(run_args);
    if (sweep_cmd->parsed()) return do_sweep(sweep_args);
    if (fit_cmd->parsed()) return do_fit(pairs_path);
  } catch (const uavisac::drv::InfeasibleScenario& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

// SPDX-License-Identifier: Apache-2.0
//
// Command line front end: solve one scenario, run the parameter studies,
// brute-force small instances, or self-validate the numerics.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "pinchopt/errors.hpp"
#include "pinchopt/harness.hpp"
#include "pinchopt/multi_pa.hpp"
#include "pinchopt/scenario.hpp"
#include "pinchopt/single_pa.hpp"
#include "pinchopt/sweep.hpp"

namespace {

using nlohmann::json;
using namespace pinchopt;

struct CommonArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "out";
  int restarts = 2;
  int num_seeds = 20;
  bool no_plots = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool sweep_flags) {
  cmd->add_option("--config", a.config_path, "JSON scenario config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", a.seed, "override the config seed");
  cmd->add_option("--restarts", a.restarts,
                  "extra random optimizer starts (N > 1)")
      ->check(CLI::NonNegativeNumber);
  if (sweep_flags) {
    cmd->add_option("--out", a.out_dir, "output directory (default: out)");
    cmd->add_option("--seeds", a.num_seeds, "number of scenario seeds")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-plots", a.no_plots, "skip SVG plot emission");
  }
}

ScenarioConfig base_config(const CommonArgs& a) {
  ScenarioConfig cfg;
  if (!a.config_path.empty()) cfg = load_config(a.config_path);
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

json beamformers_json(const std::vector<Eigen::VectorXcd>& ws) {
  json out = json::array();
  for (const auto& w : ws) {
    json bw = json::array();
    for (Eigen::Index n = 0; n < w.size(); ++n)
      bw.push_back({w[n].real(), w[n].imag()});
    out.push_back(bw);
  }
  return out;
}

int run_solve(const CommonArgs& a, bool write_file) {
  const ScenarioConfig cfg = base_config(a);
  const Scenario sc = make_scenario(cfg);

  json out;
  out["config_digest"] = config_digest(cfg);
  out["N"] = cfg.N;
  out["M"] = cfg.M;
  out["epsilon"] = cfg.epsilon;
  out["seed"] = cfg.seed;

  const BenchmarkSolution bench = solve_benchmark(sc);
  out["benchmark"] = {
      {"total_power_w", bench.total_power_w},
      {"total_power_dbm", watt_to_dbm(bench.total_power_w)},
  };

  if (cfg.N == 1) {
    const SinglePaSolution sol = pgd_solve(sc);
    out["method"] = "projected_gradient";
    out["x_star"] = {sol.x_star};
    out["total_power_w"] = sol.total_power_w;
    out["total_power_dbm"] = watt_to_dbm(sol.total_power_w);
    out["per_user_power_w"] = sol.per_user_power_w;
    out["iterations"] = sol.iterations;
    out["converged"] = sol.converged;
  } else {
    MultiStartOptions mo;
    mo.restarts = a.restarts;
    const MultiPaSolution sol = solve_multi_pa(sc, mo);
    out["method"] = "projected_lbfgs";
    out["x_star"] = std::vector<double>(sol.x_star.begin(), sol.x_star.end());
    out["total_power_w"] = sol.total_power_w;
    out["total_power_dbm"] = watt_to_dbm(sol.total_power_w);
    out["per_user_power_w"] = sol.per_user_power_w;
    out["iterations"] = sol.iterations;
    out["converged"] = sol.converged;
    out["stop_reason"] = sol.stop_reason;
    out["beamformers"] = beamformers_json(sol.beamformers);
  }

  std::cout << out.dump(2) << "\n";
  if (write_file) {
    std::filesystem::create_directories(a.out_dir);
    std::ofstream f(std::filesystem::path(a.out_dir) / "solve.json");
    if (!f) throw ConfigError("cannot write solve.json under " + a.out_dir);
    f << out.dump(2) << "\n";
  }
  return 0;
}

int run_grid(const CommonArgs& a, int points) {
  const ScenarioConfig cfg = base_config(a);
  const Scenario sc = make_scenario(cfg);
  const GridSearchResult g = grid_search(sc, points);

  json out;
  out["config_digest"] = config_digest(cfg);
  out["x_best"] = std::vector<double>(g.x_best.begin(), g.x_best.end());
  out["best_power_w"] = g.best_power_w;
  out["best_power_dbm"] = watt_to_dbm(g.best_power_w);
  out["evaluations"] = g.evaluations;
  out["points_per_dim"] = g.points_per_dim;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_validate(const CommonArgs& a, const ValidateOptions& vo) {
  const ScenarioConfig cfg = base_config(a);
  const Scenario sc = make_scenario(cfg);
  const ValidationReport report = validate(sc, vo);
  std::cout << validation_to_string(report);
  return report.pass() ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"transmit-power minimization for pinching-antenna arrays"};
  app.require_subcommand(1);

  CommonArgs solve_args;
  auto* solve_cmd =
      app.add_subcommand("solve", "optimize one scenario, print JSON");
  add_common(solve_cmd, solve_args, false);
  solve_cmd->add_option("--out", solve_args.out_dir,
                        "also write solve.json under this directory");

  CommonArgs se_args;
  std::vector<double> eps_values;
  std::vector<int> antenna_counts;
  auto* se_cmd = app.add_subcommand(
      "sweep-epsilon", "mean power vs. blockage density, CSV + SVG");
  add_common(se_cmd, se_args, true);
  se_cmd->add_option("--epsilon", eps_values,
                     "blockage densities to sweep (within [0.01, 0.1])");
  se_cmd->add_option("--antennas", antenna_counts,
                     "waveguide counts (default 1 2 4)");

  CommonArgs ss_args;
  std::vector<double> snr_values;
  std::vector<int> ss_antennas;
  std::optional<double> ss_epsilon;
  auto* ss_cmd = app.add_subcommand(
      "sweep-snr", "mean power vs. expected-SNR target, CSV + SVG");
  add_common(ss_cmd, ss_args, true);
  ss_cmd->add_option("--snr-db", snr_values,
                     "SNR targets in dB (default 10 15 20 25 30)");
  ss_cmd->add_option("--antennas", ss_antennas,
                     "waveguide counts (default 1 2 4)");
  ss_cmd->add_option("--epsilon", ss_epsilon,
                     "blockage density (default 0.06)");

  CommonArgs su_args;
  std::vector<int> user_counts;
  std::vector<double> su_snr_values;
  std::optional<double> su_epsilon;
  auto* su_cmd = app.add_subcommand(
      "sweep-users", "mean power vs. user count at N = 4, CSV + SVG");
  add_common(su_cmd, su_args, true);
  su_cmd->add_option("--users", user_counts,
                     "user counts (default 5 10 15)");
  su_cmd->add_option("--snr-db", su_snr_values,
                     "SNR targets in dB (default 10 15 20 25 30)");
  su_cmd->add_option("--epsilon", su_epsilon,
                     "blockage density (default 0.06)");

  CommonArgs gs_args;
  int gs_points = 500;
  auto* gs_cmd = app.add_subcommand(
      "grid-search", "brute force the antenna positions, print JSON");
  add_common(gs_cmd, gs_args, false);
  gs_cmd->add_option("--points", gs_points, "grid points per dimension")
      ->check(CLI::Range(2, 10'000'000));

  CommonArgs va_args;
  ValidateOptions vo;
  auto* va_cmd = app.add_subcommand(
      "validate", "self-check numerics on the configured scenario");
  add_common(va_cmd, va_args, false);
  va_cmd->add_option("--samples", vo.num_samples, "Monte Carlo draws per check");
  va_cmd->add_option("--points", vo.num_points, "random positions to test")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);

    if (app.got_subcommand(solve_cmd))
      return run_solve(solve_args, solve_cmd->count("--out") > 0);

    if (app.got_subcommand(se_cmd)) {
      SweepOptions so;
      so.num_seeds = se_args.num_seeds;
      so.restarts = se_args.restarts;
      if (!antenna_counts.empty()) so.antenna_counts = antenna_counts;
      const SweepResult res = sweep_epsilon(base_config(se_args), eps_values, so);
      emit_sweep(res, se_args.out_dir, !se_args.no_plots);
      std::cout << "wrote " << res.rows.size() << " rows to " << se_args.out_dir
                << "/" << res.name << ".csv\n";
      return 0;
    }

    if (app.got_subcommand(ss_cmd)) {
      SweepOptions so;
      so.num_seeds = ss_args.num_seeds;
      so.restarts = ss_args.restarts;
      if (!ss_antennas.empty()) so.antenna_counts = ss_antennas;
      ScenarioConfig cfg = base_config(ss_args);
      if (ss_epsilon)
        cfg.epsilon = *ss_epsilon;
      else if (ss_args.config_path.empty())
        cfg.epsilon = 0.06;  // study default
      const SweepResult res = sweep_snr(cfg, snr_values, so);
      emit_sweep(res, ss_args.out_dir, !ss_args.no_plots);
      std::cout << "wrote " << res.rows.size() << " rows to " << ss_args.out_dir
                << "/" << res.name << ".csv\n";
      return 0;
    }

    if (app.got_subcommand(su_cmd)) {
      SweepOptions so;
      so.num_seeds = su_args.num_seeds;
      so.restarts = su_args.restarts;
      ScenarioConfig cfg = base_config(su_args);
      if (su_epsilon)
        cfg.epsilon = *su_epsilon;
      else if (su_args.config_path.empty())
        cfg.epsilon = 0.06;  // study default
      const SweepResult res =
          sweep_users(cfg, user_counts, su_snr_values, so);
      emit_sweep(res, su_args.out_dir, !su_args.no_plots);
      std::cout << "wrote " << res.rows.size() << " rows to " << su_args.out_dir
                << "/" << res.name << ".csv\n";
      return 0;
    }

    if (app.got_subcommand(gs_cmd)) return run_grid(gs_args, gs_points);
    if (app.got_subcommand(va_cmd)) return run_validate(va_args, vo);

    return 1;  // unreachable with require_subcommand(1)
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pinchopt/scenario.hpp"

namespace pinchopt {

// One result row: a (swept value, seed, method) cell of a study.
struct SweepRow {
  double param = 0.0;
  std::uint64_t seed = 0;
  std::string method;  // "benchmark" or "proposed"
  int N = 0;
  int M = 0;
  double epsilon = 0.0;
  double snr_target_db = 0.0;
  double power_w = 0.0;
  double power_dbm = 0.0;
};

struct SweepResult {
  std::string name;             // file stem, e.g. "sweep_epsilon"
  std::string param_name;       // CSV semantics of the param column
  std::vector<SweepRow> rows;   // ordered by (param, N, seed, method)
  std::string config_digest;
};

struct SweepOptions {
  int num_seeds = 20;
  int restarts = 2;       // extra random starts per solve (N > 1)
  std::vector<int> antenna_counts = {1, 2, 4};
};

// Seed handling for all sweeps: seed index i runs scenario seed
// base.seed + i, so every swept value sees the same user drops.

// Mean transmit power vs. blockage density.  Values must lie in
// [0.01, 0.1]; defaults cover {0.01, 0.02, 0.04, 0.06, 0.08, 0.1}.
SweepResult sweep_epsilon(const ScenarioConfig& base,
                          std::vector<double> epsilon_values = {},
                          const SweepOptions& opts = {});

// Mean transmit power vs. expected-SNR target (dB); default {10,15,20,25,30}.
// The target scales the objective uniformly in the antenna positions, so the
// placement is solved once per (N, seed) and re-priced at each target: rows
// of one series then differ exactly by the target ratio instead of carrying
// re-optimization noise.
SweepResult sweep_snr(const ScenarioConfig& base,
                      std::vector<double> snr_db_values = {},
                      const SweepOptions& opts = {});

// Mean transmit power vs. number of users at N = 4; default M in {5, 10, 15},
// swept over the same SNR grid as sweep_snr on the x axis.
SweepResult sweep_users(const ScenarioConfig& base,
                        std::vector<int> user_counts = {},
                        std::vector<double> snr_db_values = {},
                        const SweepOptions& opts = {});

// Writes <name>.csv (and <name>.svg unless plots = false) under out_dir.
// CSV cells are "%.17g" so re-parsing reproduces the doubles exactly.
void emit_sweep(const SweepResult& result, const std::filesystem::path& out_dir,
                bool plots = true);

std::string sweep_to_csv(const SweepResult& result);
std::vector<SweepRow> parse_sweep_csv(const std::string& csv_text);

// Self-contained SVG line chart of mean power (dBm) per series.
std::string sweep_to_svg(const SweepResult& result);

}  // namespace pinchopt

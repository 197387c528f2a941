// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "pinchopt/multi_pa.hpp"
#include "pinchopt/scenario.hpp"

namespace pinchopt {

// Fixed-antenna benchmark: radiators parked at the waveguide centers
// (x_n = L/2) with the optimal beamformers for that geometry.  Power values
// come from the same objective code path as the optimizer, so the
// optimized result is never above the benchmark by construction.
struct BenchmarkSolution {
  Eigen::VectorXd x;
  std::vector<Eigen::VectorXcd> beamformers;
  std::vector<double> per_user_power_w;
  double total_power_w = 0.0;
};

BenchmarkSolution solve_benchmark(const Scenario& scenario);

struct GridSearchOptions {
  std::uint64_t budget = 10'000'000;  // refuse grids costing more than this
};

struct GridSearchResult {
  Eigen::VectorXd x_best;
  double best_power_w = 0.0;
  std::uint64_t evaluations = 0;
  int points_per_dim = 0;
};

// Exhaustive search over the inclusive uniform grid {L k/(P-1)}^N in
// lexicographic order; ties keep the lexicographically smallest point.
// Costing above the budget raises ConfigError with the estimate.
GridSearchResult grid_search(const Scenario& scenario, int points_per_dim,
                             const GridSearchOptions& opts = {});

// Cross-checks of the implementation against itself at random positions:
//  - Monte Carlo vs. closed-form expected SNR (3 std-error bands),
//  - analytic gradients vs. central differences,
//  - eigen-beamformer power vs. random feasible beamformers.
struct ValidationFamily {
  std::string name;
  int checks = 0;
  int violations = 0;
  int skipped = 0;       // points the check cannot judge: degenerate
                         // eigenpairs, links blocked in almost every draw
  double worst = 0.0;    // largest normalized defect seen (<= 1 passes)
};

struct ValidationReport {
  std::vector<ValidationFamily> families;
  bool pass() const;
};

struct ValidateOptions {
  int num_points = 8;
  std::uint64_t num_samples = 200000;  // Monte Carlo draws per check
  int num_beam_trials = 64;            // random beamformers per point/user
};

ValidationReport validate(const Scenario& scenario, const ValidateOptions& opts = {});

std::string validation_to_string(const ValidationReport& report);

}  // namespace pinchopt

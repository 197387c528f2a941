// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "pinchopt/expected_snr.hpp"
#include "pinchopt/scenario.hpp"

namespace pinchopt {

// Multi-antenna problem: minimize f(x) = sum_m c_m sigma_m^2 / lambda_max(A_m(x))
// over per-waveguide positions x in [0, L]^N, then read the beamformers off
// the dominant eigenvectors.

// Minimum-power beamformer for one user at fixed positions:
// w = sqrt(c sigma^2 / lambda_max) * v_max.
Eigen::VectorXcd optimal_beamformer(const Eigen::VectorXd& x, const User& user,
                                    const PhysicalConstants& pc,
                                    const WaveguideLayout& layout);

double objective_multi(const Eigen::VectorXd& x, const Scenario& scenario);

struct ObjectiveEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  bool fd_fallback = false;  // some user's eigenpair was flagged degenerate
};

// Analytic gradient via first-order eigenvalue perturbation,
//   d lambda / d x_n = 2 Re{ v_n^* u_n' (u^H v) } + |v_n|^2 v_n',
// switching to central differences on the whole gradient whenever any
// user's eigenpair is degenerate at x.
ObjectiveEval objective_and_gradient(const Eigen::VectorXd& x,
                                     const Scenario& scenario);

Eigen::VectorXd gradient_multi(const Eigen::VectorXd& x,
                               const Scenario& scenario);

// Limited-memory inverse-Hessian model.  Stores up to `capacity` recent
// (s, y) pairs; push() rejects pairs with s^T y <= 1e-12 ||s|| ||y||, so
// every stored curvature rho_i is positive.
class LbfgsBuffer {
 public:
  explicit LbfgsBuffer(int capacity);

  bool push(const Eigen::VectorXd& s, const Eigen::VectorXd& y);
  // Two-loop recursion: returns H g where H seeds with
  // gamma I, gamma = s^T y / y^T y of the newest pair (1 when empty).
  Eigen::VectorXd apply(const Eigen::VectorXd& g) const;

  int size() const { return static_cast<int>(pairs_.size()); }
  int capacity() const { return capacity_; }
  void clear() { pairs_.clear(); }

 private:
  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::vector<Pair> pairs_;  // oldest first
  int capacity_;
};

struct LbfgsOptions {
  std::optional<Eigen::VectorXd> x0;  // default: all L/2
  int memory = 8;
  int max_iterations = 500;
  double stationarity_tol = 1e-8;  // ||x - clamp(x - g)||_inf <= tol * L
  double objective_tol = 1e-12;    // |delta f| <= tol * (1 + f)
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-14;
  bool keep_trace = false;
};

struct LbfgsIterate {
  int iteration = 0;
  double objective = 0.0;
  double stationarity = 0.0;
  double step = 0.0;
};

struct MultiPaSolution {
  Eigen::VectorXd x_star;
  std::vector<Eigen::VectorXcd> beamformers;  // one per user, from x_star
  std::vector<double> per_user_power_w;       // ||w_m||^2
  double total_power_w = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  int fd_fallback_evals = 0;
  std::vector<LbfgsIterate> trace;
};

// Projected L-BFGS: two-loop direction, projection onto [0, L]^N inside an
// Armijo backtracking search, curvature-guarded buffer updates.  Accepted
// objective values never increase.
MultiPaSolution lbfgs_solve(const Scenario& scenario, const LbfgsOptions& opts = {});

struct MultiStartOptions {
  LbfgsOptions lbfgs;
  int restarts = 0;  // random starts in addition to the center start
};

// Center start (all L/2) plus `restarts` uniform random starts drawn from
// the scenario seed's restart stream; returns the lowest-power solution.
MultiPaSolution solve_multi_pa(const Scenario& scenario,
                               const MultiStartOptions& opts = {});

}  // namespace pinchopt

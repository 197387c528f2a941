// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "pinchopt/scenario.hpp"

namespace pinchopt {

// Single-antenna (N = 1) problem: the waveguide runs along y = 0 and the
// per-user power needed to hit the expected-SNR target has the closed form
//   P_m(x) = c_m sigma_m^2 / eta * t_m e^{eps t_m},
//   t_m(x) = (x - q_{m,1})^2 + q_{m,2}^2 + d_z^2.

double power_closed_form(double x, const User& user,
                         const PhysicalConstants& pc, double height_m);

// Sum of the per-user closed forms; strictly convex in x.
double objective_single(double x, const Scenario& scenario);

// d/dx of the objective: sum_m ctil_m e^{eps t_m} (1 + eps t_m) 2 (x - q_{m,1}).
double gradient_single(double x, const Scenario& scenario);

struct PgdOptions {
  std::optional<double> x0;         // default L/2
  int max_iterations = 10000;
  // |x - clamp(x - g)| <= tol * L.  Tight enough that a single-user run
  // pins the minimizer to ~1e-7 m at default targets; when the objective
  // is too large to resolve the matching decrease, the solver stops at the
  // machine-stationary point instead and still reports convergence.
  double stationarity_tol = 1e-10;
  double armijo_c1 = 1e-4;
  double backtrack = 0.5;
  double min_step = 1e-18;
  bool keep_trace = false;
};

struct PgdIterate {
  int iteration = 0;
  double x = 0.0;
  double objective = 0.0;
  double step = 0.0;
};

struct SinglePaSolution {
  double x_star = 0.0;
  double total_power_w = 0.0;
  std::vector<double> per_user_power_w;
  int iterations = 0;
  bool converged = false;
  std::vector<PgdIterate> trace;  // filled when keep_trace
};

// Projected gradient descent on [0, L] with Armijo backtracking.  First
// trial step L^2 / (1 + |g0|); later iterations re-open at twice the last
// accepted step.  Objective values along the trace never increase.
SinglePaSolution pgd_solve(const Scenario& scenario, const PgdOptions& opts = {});

}  // namespace pinchopt

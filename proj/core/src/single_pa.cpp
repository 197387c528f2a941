// SPDX-License-Identifier: Apache-2.0
#include "pinchopt/single_pa.hpp"

#include <algorithm>
#include <cmath>

#include "pinchopt/errors.hpp"

namespace pinchopt {

namespace {

// squared antenna-user distance with the waveguide on the y = 0 axis
double squared_reach(double x, const User& user, double height_m) {
  const double dx = x - user.position_m.x();
  const double dy = user.position_m.y();
  const double dz = height_m - user.position_m.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

double power_closed_form(double x, const User& user,
                         const PhysicalConstants& pc, double height_m) {
  const double t = squared_reach(x, user, height_m);
  if (!(t > 0.0))
    throw NumericalError("antenna coincides with user: channel is singular");
  const double scale =
      user.snr_target_linear * user.noise_power_w / pc.path_gain_const;
  return scale * t * std::exp(pc.blockage_density_per_m2 * t);
}

double objective_single(double x, const Scenario& scenario) {
  double total = 0.0;
  for (const auto& user : scenario.users)
    total += power_closed_form(x, user, scenario.constants,
                               scenario.layout.height_m);
  return total;
}

double gradient_single(double x, const Scenario& scenario) {
  const double eps = scenario.constants.blockage_density_per_m2;
  double g = 0.0;
  for (const auto& user : scenario.users) {
    const double t = squared_reach(x, user, scenario.layout.height_m);
    const double scale = user.snr_target_linear * user.noise_power_w /
                         scenario.constants.path_gain_const;
    // d/dx [t e^{eps t}] = e^{eps t} (1 + eps t) * 2 (x - q1)
    g += scale * std::exp(eps * t) * (1.0 + eps * t) * 2.0 *
         (x - user.position_m.x());
  }
  return g;
}

SinglePaSolution pgd_solve(const Scenario& scenario, const PgdOptions& opts) {
  if (scenario.num_antennas() != 1)
    throw ConfigError("projected gradient solver handles exactly one waveguide");
  const double L = scenario.layout.region_side_m;
  const auto project = [L](double v) { return std::clamp(v, 0.0, L); };

  double x = project(opts.x0.value_or(0.5 * L));
  double f = objective_single(x, scenario);
  double g = gradient_single(x, scenario);
  double step_open = L * L / (1.0 + std::abs(g));

  SinglePaSolution sol;
  if (opts.keep_trace) sol.trace.push_back({0, x, f, 0.0});

  for (int k = 1; k <= opts.max_iterations; ++k) {
    if (std::abs(x - project(x - g)) <= opts.stationarity_tol * L) {
      sol.converged = true;
      break;
    }
    double t = step_open;
    bool accepted = false;
    double xn = x, fn = f;
    while (t >= opts.min_step) {
      xn = project(x - t * g);
      fn = objective_single(xn, scenario);
      // the min(0, .) keeps the test meaningful when projection bends the
      // step; accepted objectives can then never increase
      const double pred = g * (xn - x);
      if (fn <= f + opts.armijo_c1 * std::min(0.0, pred)) {
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) break;  // numerically stationary: no step improves f
    if (xn == x) {
      // movement underflowed and larger steps all raised f: x is a local
      // minimizer at machine resolution even if |g| is still above tol
      sol.converged = true;
      break;
    }

    x = xn;
    f = fn;
    g = gradient_single(x, scenario);
    step_open = 2.0 * t;
    sol.iterations = k;
    if (opts.keep_trace) sol.trace.push_back({k, x, f, t});
  }

  sol.x_star = x;
  sol.total_power_w = f;
  sol.per_user_power_w.reserve(scenario.users.size());
  for (const auto& user : scenario.users)
    sol.per_user_power_w.push_back(power_closed_form(
        x, user, scenario.constants, scenario.layout.height_m));
  return sol;
}

}  // namespace pinchopt

// SPDX-License-Identifier: Apache-2.0
#include "pinchopt/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "pinchopt/channel.hpp"
#include "pinchopt/errors.hpp"
#include "pinchopt/expected_snr.hpp"
#include "pinchopt/rng.hpp"
#include "pinchopt/single_pa.hpp"

namespace pinchopt {

BenchmarkSolution solve_benchmark(const Scenario& scenario) {
  BenchmarkSolution b;
  b.x = Eigen::VectorXd::Constant(scenario.num_antennas(),
                                  0.5 * scenario.layout.region_side_m);
  // same evaluation path as the optimizer, so optimized <= benchmark holds
  // bit for bit
  b.total_power_w = objective_multi(b.x, scenario);
  b.beamformers.reserve(scenario.users.size());
  b.per_user_power_w.reserve(scenario.users.size());
  for (const auto& user : scenario.users) {
    Eigen::VectorXcd w = optimal_beamformer(b.x, user, scenario.constants,
                                            scenario.layout);
    b.per_user_power_w.push_back(w.squaredNorm());
    b.beamformers.push_back(std::move(w));
  }
  return b;
}

GridSearchResult grid_search(const Scenario& scenario, int points_per_dim,
                             const GridSearchOptions& opts) {
  if (points_per_dim < 2)
    throw ConfigError("grid search needs at least 2 points per dimension");
  const int N = scenario.num_antennas();
  const double L = scenario.layout.region_side_m;

  const double cost = std::pow(static_cast<double>(points_per_dim), N);
  if (cost > static_cast<double>(opts.budget)) {
    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "grid search would take %.3g evaluations, budget is %llu",
                  cost, static_cast<unsigned long long>(opts.budget));
    throw ConfigError(msg);
  }

  const auto coord = [&](int k) {
    return L * static_cast<double>(k) / static_cast<double>(points_per_dim - 1);
  };

  std::vector<int> idx(N, 0);
  Eigen::VectorXd x(N);
  GridSearchResult best;
  best.points_per_dim = points_per_dim;
  best.best_power_w = std::numeric_limits<double>::infinity();

  // odometer with the last coordinate fastest = lexicographic ascending;
  // strict improvement keeps the lexicographically smallest tie
  while (true) {
    for (int n = 0; n < N; ++n) x[n] = coord(idx[n]);
    const double f =
        N == 1 ? objective_single(x[0], scenario) : objective_multi(x, scenario);
    ++best.evaluations;
    if (f < best.best_power_w) {
      best.best_power_w = f;
      best.x_best = x;
    }
    int n = N - 1;
    while (n >= 0 && ++idx[n] == points_per_dim) {
      idx[n] = 0;
      --n;
    }
    if (n < 0) break;
  }
  return best;
}

bool ValidationReport::pass() const {
  for (const auto& f : families)
    if (f.violations > 0) return false;
  return true;
}

ValidationReport validate(const Scenario& scenario,
                          const ValidateOptions& opts) {
  const int N = scenario.num_antennas();
  const int M = scenario.num_users();
  if (N < 1) throw ConfigError("validate: scenario has no waveguides");
  if (M < 1) throw ConfigError("validate: scenario has no users");
  const double L = scenario.layout.region_side_m;

  const std::uint64_t stream =
      rng::substream(scenario.rng_seed, rng::Stream::kValidation);
  std::uint64_t ctr = 0;
  const auto next_u = [&] { return rng::uniform01(stream, ctr++); };
  const auto next_normal = [&] {
    const double u1 = rng::uniform01_open(stream, ctr++);
    const double u2 = rng::uniform01(stream, ctr++);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  };

  ValidationFamily mc{"monte_carlo_vs_closed_form", 0, 0, 0, 0.0};
  ValidationFamily gr{"gradient_vs_finite_difference", 0, 0, 0, 0.0};
  ValidationFamily bf{"eigen_beamformer_optimality", 0, 0, 0, 0.0};

  for (int k = 0; k < opts.num_points; ++k) {
    Eigen::VectorXd x(N);
    for (int n = 0; n < N; ++n) x[n] = L * next_u();
    const int m = k % M;
    const User& user = scenario.users[m];
    const ExpectedSnrMatrix A =
        build_expected_matrix(x, user, scenario.constants, scenario.layout);

    // --- Monte Carlo estimate vs. closed-form expected SNR
    {
      Eigen::VectorXcd w(N);
      for (int n = 0; n < N; ++n)
        w[n] = std::complex<double>(next_u() - 0.5, next_u() - 0.5);
      if (w.norm() == 0.0) w[0] = 1.0;
      w.normalize();
      // when essentially every draw has all links blocked the sample mean
      // cannot resolve the closed form at all; skip instead of reading noise
      const Eigen::MatrixXd probs = los_probability_matrix(x, scenario);
      double all_blocked = 1.0;
      for (int n = 0; n < N; ++n) all_blocked *= 1.0 - probs(n, m);
      if ((1.0 - all_blocked) * static_cast<double>(opts.num_samples) < 25.0) {
        ++mc.skipped;
      } else {
        const double closed = expected_snr_multi(A, w, user.noise_power_w);
        const auto est = monte_carlo_expected_snr(
            x, w, scenario, m, opts.num_samples, rng::bits(stream, 100000 + k));
        const double dev = std::abs(est.mean - closed);
        const double limit = 3.0 * est.std_error + 1e-9 * closed;
        ++mc.checks;
        if (dev > limit) ++mc.violations;
        if (limit > 0.0) mc.worst = std::max(mc.worst, dev / limit);
      }
    }

    // --- analytic gradient vs. central differences
    {
      const auto eval = objective_and_gradient(x, scenario);
      if (eval.fd_fallback) {
        ++gr.skipped;  // gradient already is the finite difference
      } else {
        const double h = 1e-6 * L;
        for (int n = 0; n < N; ++n) {
          Eigen::VectorXd xp = x, xm = x;
          xp[n] += h;
          xm[n] -= h;
          // interior points only; clamp the stencil inside the box
          const double fp = objective_multi(
              xp.cwiseMin(L).cwiseMax(0.0), scenario);
          const double fm = objective_multi(
              xm.cwiseMin(L).cwiseMax(0.0), scenario);
          const double denom = (xp.cwiseMin(L).cwiseMax(0.0)[n] -
                                xm.cwiseMin(L).cwiseMax(0.0)[n]);
          const double fd = (fp - fm) / denom;
          // the difference quotient itself carries ~eps * f / denom of
          // roundoff, so near-zero components are judged against that floor
          const double noise = 256.0 *
                               std::numeric_limits<double>::epsilon() *
                               (1.0 + eval.value) / denom;
          const double limit = 1e-4 * std::abs(fd) + noise;
          const double err = std::abs(eval.gradient[n] - fd);
          ++gr.checks;
          if (err > limit) ++gr.violations;
          gr.worst = std::max(gr.worst, err / limit);
        }
      }
    }

    // --- no random feasible beamformer beats the eigen one
    {
      const Eigen::VectorXcd wstar =
          optimal_beamformer(x, user, scenario.constants, scenario.layout);
      const double base = wstar.squaredNorm();
      for (int trial = 0; trial < opts.num_beam_trials; ++trial) {
        Eigen::VectorXcd wt(N);
        for (int n = 0; n < N; ++n)
          wt[n] = std::complex<double>(next_normal(), next_normal());
        const double snr = expected_snr_multi(A, wt, user.noise_power_w);
        if (!(snr > 0.0)) continue;
        // rescale so the expected-SNR target is met with equality
        wt *= std::sqrt(user.snr_target_linear / snr);
        const double power = wt.squaredNorm();
        ++bf.checks;
        if (power < base * (1.0 - 1e-10)) ++bf.violations;
        bf.worst = std::max(bf.worst, (base - power) / (1e-10 * base));
      }
    }
  }

  ValidationReport report;
  report.families = {mc, gr, bf};
  return report;
}

std::string validation_to_string(const ValidationReport& report) {
  std::ostringstream os;
  for (const auto& f : report.families) {
    os << (f.violations == 0 ? "PASS" : "FAIL") << "  " << f.name << ": "
       << f.checks << " checks, " << f.violations << " violations";
    if (f.skipped > 0) os << ", " << f.skipped << " skipped";
    char buf[48];
    std::snprintf(buf, sizeof buf, ", worst %.3g", f.worst);
    os << buf << " (of 1 allowed)\n";
  }
  os << (report.pass() ? "validation passed" : "validation FAILED") << "\n";
  return os.str();
}

}  // namespace pinchopt

// SPDX-License-Identifier: Apache-2.0
#include "pinchopt/multi_pa.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include "pinchopt/channel.hpp"
#include "pinchopt/errors.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

namespace {

struct UserEval {
  ExpectedSnrMatrix A;
  EigenPair eig;
};

void check_positions(const Eigen::VectorXd& x, const Scenario& s) {
  if (x.size() != s.num_antennas())
    throw ConfigError("antenna position vector must have one entry per waveguide");
  for (Eigen::Index n = 0; n < x.size(); ++n)
    if (!(x[n] >= 0.0 && x[n] <= s.layout.region_side_m))
      throw ConfigError("antenna position outside [0, L]");
}

// Objective at arbitrary positions (finite-difference stencils step outside
// the box).  Optionally reports per-user eigen data and the degeneracy flag.
double objective_unchecked(const Eigen::VectorXd& x, const Scenario& sc,
                           bool* any_degenerate = nullptr,
                           std::vector<UserEval>* evals = nullptr) {
  double total = 0.0;
  bool degen = false;
  for (const auto& user : sc.users) {
    ExpectedSnrMatrix A = detail::build_expected_matrix_unchecked(
        x, user, sc.constants, sc.layout);
    EigenPair e = largest_eigenpair(A);
    if (!(e.lambda_max > 0.0))
      throw NumericalError(
          "expected SNR matrix has no positive eigenvalue: target unreachable",
          e.lambda_max);
    total += user.snr_target_linear * user.noise_power_w / e.lambda_max;
    degen = degen || e.degenerate;
    if (evals) evals->push_back({std::move(A), std::move(e)});
  }
  if (any_degenerate) *any_degenerate = degen;
  return total;
}

// d lambda_max / d x_n by first-order perturbation of the factored matrix:
// only component n of u and of the diagonal depends on x_n.
Eigen::VectorXd analytic_gradient(const Eigen::VectorXd& x, const Scenario& sc,
                                  const std::vector<UserEval>& evals) {
  const int N = sc.num_antennas();
  const auto& pc = sc.constants;
  const double eps = pc.blockage_density_per_m2;
  const double twopi = 2.0 * std::numbers::pi;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(N);
  for (int m = 0; m < sc.num_users(); ++m) {
    const auto& user = sc.users[m];
    const auto& A = evals[m].A;
    const auto& e = evals[m].eig;
    const std::complex<double> s = A.u.dot(e.v);  // u^H v
    const double coef = -user.snr_target_linear * user.noise_power_w /
                        (e.lambda_max * e.lambda_max);
    for (int n = 0; n < N; ++n) {
      const double dx = x[n] - user.position_m.x();
      const double dy = sc.layout.waveguide_y_m[n] - user.position_m.y();
      const double dz = sc.layout.height_m - user.position_m.z();
      const double d2 = dx * dx + dy * dy + dz * dz;
      const double d = std::sqrt(d2);
      const double dd = dx / d;  // d distance / d x_n
      const double p = std::exp(-eps * d2);
      const double g2 = pc.path_gain_const / d2;  // |h_n|^2

      // u_n = p h_n, so u_n' = u_n (p'/p + h'/h); the phase derivative
      // covers both the air path and the in-guide path
      const std::complex<double> logder(
          -2.0 * eps * dx - dd / d,
          -twopi * (dd / pc.free_space_wavelength_m +
                    1.0 / pc.waveguide_wavelength_m));
      const std::complex<double> du = A.u[n] * logder;

      // v_n = p (1 - p) |h_n|^2, with d|h|^2/dx = -2 |h|^2 dd / d
      const double pprime = -2.0 * eps * dx * p;
      const double dv =
          g2 * (pprime * (1.0 - 2.0 * p) - 2.0 * p * (1.0 - p) * dd / d);

      const double dlambda =
          2.0 * std::real(std::conj(e.v[n]) * du * s) + std::norm(e.v[n]) * dv;
      grad[n] += coef * dlambda;
    }
  }
  return grad;
}

Eigen::VectorXd fd_gradient(const Eigen::VectorXd& x, const Scenario& sc) {
  const double h = 1e-6 * sc.layout.region_side_m;
  Eigen::VectorXd g(x.size());
  for (Eigen::Index n = 0; n < x.size(); ++n) {
    Eigen::VectorXd xp = x, xm = x;
    xp[n] += h;
    xm[n] -= h;
    g[n] = (objective_unchecked(xp, sc) - objective_unchecked(xm, sc)) /
           (2.0 * h);
  }
  return g;
}

ObjectiveEval eval_full(const Eigen::VectorXd& x, const Scenario& sc) {
  std::vector<UserEval> evals;
  evals.reserve(sc.users.size());
  bool degen = false;

  ObjectiveEval out;
  out.value = objective_unchecked(x, sc, &degen, &evals);
  if (degen) {
    // eigenvector direction is unreliable: differentiate the objective itself
    out.gradient = fd_gradient(x, sc);
    out.fd_fallback = true;
  } else {
    out.gradient = analytic_gradient(x, sc, evals);
  }
  return out;
}

}  // namespace

Eigen::VectorXcd optimal_beamformer(const Eigen::VectorXd& x, const User& user,
                                    const PhysicalConstants& pc,
                                    const WaveguideLayout& layout) {
  const ExpectedSnrMatrix A = build_expected_matrix(x, user, pc, layout);
  const EigenPair e = largest_eigenpair(A);
  if (!(e.lambda_max > 0.0))
    throw NumericalError(
        "expected SNR matrix has no positive eigenvalue: target unreachable",
        e.lambda_max);
  return std::sqrt(user.snr_target_linear * user.noise_power_w /
                   e.lambda_max) *
         e.v;
}

double objective_multi(const Eigen::VectorXd& x, const Scenario& scenario) {
  check_positions(x, scenario);
  return objective_unchecked(x, scenario);
}

ObjectiveEval objective_and_gradient(const Eigen::VectorXd& x,
                                     const Scenario& scenario) {
  check_positions(x, scenario);
  return eval_full(x, scenario);
}

Eigen::VectorXd gradient_multi(const Eigen::VectorXd& x,
                               const Scenario& scenario) {
  return objective_and_gradient(x, scenario).gradient;
}

LbfgsBuffer::LbfgsBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ConfigError("buffer capacity must be >= 1");
}

bool LbfgsBuffer::push(const Eigen::VectorXd& s, const Eigen::VectorXd& y) {
  const double sy = s.dot(y);
  if (!(sy > 1e-12 * s.norm() * y.norm())) return false;  // curvature guard
  if (static_cast<int>(pairs_.size()) == capacity_)
    pairs_.erase(pairs_.begin());
  pairs_.push_back({s, y, 1.0 / sy});
  return true;
}

Eigen::VectorXd LbfgsBuffer::apply(const Eigen::VectorXd& g) const {
  Eigen::VectorXd q = g;
  const int k = size();
  std::vector<double> alpha(k);
  for (int i = k - 1; i >= 0; --i) {
    alpha[i] = pairs_[i].rho * pairs_[i].s.dot(q);
    q -= alpha[i] * pairs_[i].y;
  }
  double gamma = 1.0;
  if (k > 0) {
    const auto& newest = pairs_.back();
    gamma = 1.0 / (newest.rho * newest.y.squaredNorm());
  }
  Eigen::VectorXd r = gamma * q;
  for (int i = 0; i < k; ++i) {
    const double beta = pairs_[i].rho * pairs_[i].y.dot(r);
    r += (alpha[i] - beta) * pairs_[i].s;
  }
  return r;
}

MultiPaSolution lbfgs_solve(const Scenario& scenario,
                            const LbfgsOptions& opts) {
  const int N = scenario.num_antennas();
  const double L = scenario.layout.region_side_m;
  const auto project = [L](const Eigen::VectorXd& v) {
    return v.cwiseMax(0.0).cwiseMin(L).eval();
  };
  const auto stationarity = [&](const Eigen::VectorXd& x,
                                const Eigen::VectorXd& g) {
    return (x - project(x - g)).lpNorm<Eigen::Infinity>();
  };

  Eigen::VectorXd x;
  if (opts.x0) {
    if (opts.x0->size() != N)
      throw ConfigError("start point must have one entry per waveguide");
    x = project(*opts.x0);
  } else {
    x = Eigen::VectorXd::Constant(N, 0.5 * L);
  }

  ObjectiveEval cur = eval_full(x, scenario);
  LbfgsBuffer buf(opts.memory);

  MultiPaSolution sol;
  sol.fd_fallback_evals = cur.fd_fallback ? 1 : 0;
  sol.stop_reason = "max_iterations";
  if (opts.keep_trace)
    sol.trace.push_back({0, cur.value, stationarity(x, cur.gradient), 0.0});

  for (int k = 1; k <= opts.max_iterations; ++k) {
    if (stationarity(x, cur.gradient) <= opts.stationarity_tol * L) {
      sol.converged = true;
      sol.stop_reason = "stationarity";
      break;
    }

    Eigen::VectorXd p = -buf.apply(cur.gradient);
    if (!(p.dot(cur.gradient) < 0.0)) p = -cur.gradient;  // force descent

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd xn;
    while (t >= opts.min_step) {
      xn = project(x + t * p);
      const double fn = objective_unchecked(xn, scenario);
      const double pred = cur.gradient.dot(xn - x);
      // min(0, .) guards projected steps; accepted f never increases
      if (fn <= cur.value + opts.armijo_c1 * std::min(0.0, pred)) {
        accepted = true;
        break;
      }
      t *= opts.backtrack;
    }
    if (!accepted) {
      sol.stop_reason = "line_search_exhausted";
      break;
    }

    ObjectiveEval next = eval_full(xn, scenario);
    if (next.fd_fallback) ++sol.fd_fallback_evals;
    buf.push(xn - x, next.gradient - cur.gradient);

    const double fprev = cur.value;
    x = xn;
    cur = std::move(next);
    sol.iterations = k;
    if (opts.keep_trace)
      sol.trace.push_back({k, cur.value, stationarity(x, cur.gradient), t});

    if (std::abs(fprev - cur.value) <=
        opts.objective_tol * (1.0 + std::abs(cur.value))) {
      sol.converged = true;
      sol.stop_reason = "objective_stall";
      break;
    }
  }

  sol.x_star = x;
  sol.total_power_w = cur.value;
  sol.beamformers.reserve(scenario.users.size());
  sol.per_user_power_w.reserve(scenario.users.size());
  for (const auto& user : scenario.users) {
    Eigen::VectorXcd w =
        optimal_beamformer(x, user, scenario.constants, scenario.layout);
    sol.per_user_power_w.push_back(w.squaredNorm());
    sol.beamformers.push_back(std::move(w));
  }
  return sol;
}

MultiPaSolution solve_multi_pa(const Scenario& scenario,
                               const MultiStartOptions& opts) {
  const int N = scenario.num_antennas();
  const double L = scenario.layout.region_side_m;

  LbfgsOptions lo = opts.lbfgs;
  lo.x0 = Eigen::VectorXd::Constant(N, 0.5 * L);
  MultiPaSolution best = lbfgs_solve(scenario, lo);

  const std::uint64_t stream =
      rng::substream(scenario.rng_seed, rng::Stream::kRestarts);
  for (int r = 0; r < opts.restarts; ++r) {
    Eigen::VectorXd x0(N);
    for (int n = 0; n < N; ++n)
      x0[n] = L * rng::uniform01(stream, static_cast<std::uint64_t>(r) * N +
                                             static_cast<std::uint64_t>(n));
    lo.x0 = x0;
    MultiPaSolution cand = lbfgs_solve(scenario, lo);
    if (cand.total_power_w < best.total_power_w) best = std::move(cand);
  }
  return best;
}

}  // namespace pinchopt

// SPDX-License-Identifier: Apache-2.0
#include "pinchopt/expected_snr.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pinchopt/channel.hpp"
#include "pinchopt/errors.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

double ExpectedSnrMatrix::trace() const {
  return u.squaredNorm() + v_diag.sum();
}

Eigen::VectorXcd ExpectedSnrMatrix::apply(const Eigen::VectorXcd& w) const {
  return u * u.dot(w) +
         (v_diag.array().cast<std::complex<double>>() * w.array()).matrix();
}

Eigen::MatrixXcd ExpectedSnrMatrix::dense() const {
  Eigen::MatrixXcd A = u * u.adjoint();
  A.diagonal() += v_diag.cast<std::complex<double>>();
  return A;
}

namespace detail {

ExpectedSnrMatrix build_expected_matrix_unchecked(const Eigen::VectorXd& x,
                                                  const User& user,
                                                  const PhysicalConstants& pc,
                                                  const WaveguideLayout& layout) {
  const int N = layout.num_antennas;
  ExpectedSnrMatrix A;
  A.u.resize(N);
  A.v_diag.resize(N);
  for (int n = 0; n < N; ++n) {
    const LinkState st =
        link_state(x[n], layout.waveguide_y_m[n], user, pc, layout.height_m);
    A.u[n] = st.p_los * st.h;
    A.v_diag[n] = st.p_los * (1.0 - st.p_los) * st.gain_sq;
  }
  return A;
}

}  // namespace detail

ExpectedSnrMatrix build_expected_matrix(const Eigen::VectorXd& x,
                                        const User& user,
                                        const PhysicalConstants& pc,
                                        const WaveguideLayout& layout) {
  if (x.size() != layout.num_antennas)
    throw ConfigError("antenna position vector must have one entry per waveguide");
  for (Eigen::Index n = 0; n < x.size(); ++n)
    if (!(x[n] >= 0.0 && x[n] <= layout.region_side_m))
      throw ConfigError("antenna position outside [0, L]");
  return detail::build_expected_matrix_unchecked(x, user, pc, layout);
}

double expected_snr_multi(const ExpectedSnrMatrix& A,
                          const Eigen::VectorXcd& w, double noise_power_w) {
  if (w.size() != A.size())
    throw ConfigError("beamformer dimension does not match the matrix");
  if (!(noise_power_w > 0.0)) throw ConfigError("noise power must be positive");
  const double quad =
      std::norm(A.u.dot(w)) + (A.v_diag.array() * w.array().abs2()).sum();
  return quad / noise_power_w;
}

double expected_snr_single(double x, double power_w, const User& user,
                           const PhysicalConstants& pc, double height_m) {
  if (!(power_w >= 0.0)) throw ConfigError("transmit power must be >= 0");
  const double dx = x - user.position_m.x();
  const double dy = user.position_m.y();
  const double dz = height_m - user.position_m.z();
  const double t = dx * dx + dy * dy + dz * dz;  // squared distance
  if (!(t > 0.0))
    throw NumericalError("antenna coincides with user: channel is singular");
  return power_w * pc.path_gain_const *
         std::exp(-pc.blockage_density_per_m2 * t) /
         (user.noise_power_w * t);
}

namespace {

// Cheap estimate of the second eigenvalue: a short power iteration on the
// complement of the dominant direction.  Accuracy only needs to resolve
// whether the relative gap clears the degeneracy threshold.
double estimate_second_eigenvalue(const ExpectedSnrMatrix& A, double lambda1,
                                  const Eigen::VectorXcd& v1) {
  const int n = A.size();
  if (n < 2 || !(lambda1 > 0.0)) return 0.0;

  Eigen::Index j = 0;
  v1.cwiseAbs().minCoeff(&j);
  Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n);
  w[j] = 1.0;
  w -= v1 * v1.dot(w);
  if (w.norm() < 1e-8) {
    // v1 is (nearly) that coordinate axis; fall back to a spread start
    w = Eigen::VectorXcd::Constant(n, 1.0);
    for (int i = 0; i < n; ++i) w[i] *= 1.0 + 0.25 * std::cos(1.0 + i);
    w -= v1 * v1.dot(w);
    if (w.norm() < 1e-8) return 0.0;
  }
  w.normalize();

  double lam2 = 0.0;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 128; ++it) {
    Eigen::VectorXcd y = A.apply(w);
    y -= v1 * v1.dot(y);  // deflate the dominant direction
    lam2 = w.dot(y).real();
    const double yn = y.norm();
    if (yn == 0.0) return std::max(lam2, 0.0);
    w = y / yn;
    if (std::abs(lam2 - prev) <= 1e-5 * lambda1) break;
    prev = lam2;
  }
  return lam2;
}

}  // namespace

EigenPair largest_eigenpair(const ExpectedSnrMatrix& A,
                            const EigenOptions& opts) {
  const int n = A.size();
  if (n < 1) throw ConfigError("matrix is empty");
  if (A.v_diag.size() != n)
    throw ConfigError("factored matrix parts have different sizes");

  const double tr = A.trace();
  if (!std::isfinite(tr) || tr < 0.0)
    throw NumericalError("expected SNR matrix has an invalid trace", tr);

  EigenPair out;
  if (tr == 0.0) {  // zero matrix; any unit vector is an eigenvector
    out.v = Eigen::VectorXcd::Zero(n);
    out.v[0] = 1.0;
    out.gap_estimate = 0.0;
    out.degenerate = true;
    return out;
  }
  if (n == 1) {
    out.lambda_max = std::norm(A.u[0]) + A.v_diag[0];
    out.v = Eigen::VectorXcd::Ones(1);
    return out;
  }
  if (A.u.squaredNorm() == 0.0) {  // purely diagonal
    Eigen::Index imax = 0;
    out.lambda_max = A.v_diag.maxCoeff(&imax);
    out.v = Eigen::VectorXcd::Zero(n);
    out.v[imax] = 1.0;
    double second = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
      if (i != imax) second = std::max(second, A.v_diag[i]);
    out.gap_estimate =
        out.lambda_max > 0.0
            ? std::clamp((out.lambda_max - second) / out.lambda_max, 0.0, 1.0)
            : 0.0;
    out.degenerate = out.gap_estimate < opts.degenerate_gap;
    return out;
  }

  // Start from u's phase profile on strictly positive magnitudes: the
  // dominant eigenvector of u u^H + diag(v) has components u_n * (real >= 0)
  // plus pure diagonal directions, so this start cannot be orthogonal to it.
  Eigen::VectorXcd v(n);
  const double unorm = A.u.norm();
  const double floor_mag = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    const double mag = std::abs(A.u[i]);
    const double m = mag / unorm + floor_mag;
    v[i] = mag > 0.0 ? A.u[i] * (m / mag) : std::complex<double>(m, 0.0);
  }
  v.normalize();

  double lambda = 0.0;
  double prev_lambda = std::numeric_limits<double>::quiet_NaN();
  double resid = std::numeric_limits<double>::infinity();
  bool clean = false;
  int iters = 0;
  for (int k = 1; k <= opts.max_iterations; ++k) {
    iters = k;
    const Eigen::VectorXcd y = A.apply(v);
    lambda = v.dot(y).real();  // Rayleigh quotient; v has unit norm
    resid = (y - lambda * v).norm();
    const bool resid_ok = resid <= opts.residual_tol * tr;
    const bool rayleigh_ok =
        std::isfinite(prev_lambda) &&
        std::abs(lambda - prev_lambda) <=
            opts.rayleigh_tol * std::max(std::abs(lambda),
                                         std::numeric_limits<double>::min());
    if (resid_ok && rayleigh_ok) {
      clean = true;
      break;
    }
    prev_lambda = lambda;
    const double ynorm = y.norm();
    if (ynorm == 0.0) break;  // iterate fell into the kernel
    v = y / ynorm;
  }

  if (!clean) {
    // refresh the certificate for the final iterate
    const Eigen::VectorXcd y = A.apply(v);
    lambda = v.dot(y).real();
    resid = (y - lambda * v).norm();
    if (!(resid <= opts.accept_residual_tol * tr))
      throw NumericalError(
          "power iteration did not converge: residual " +
              std::to_string(resid) + " vs trace " + std::to_string(tr),
          resid);
    out.degenerate = true;  // direction unresolved at the iteration cap
  }

  // Rayleigh-Ritz sharpening on the Krylov space {v, Av, A^2 v, A^3 v}.
  // Near-tied top eigenvalues stall the plain iteration with an
  // O(resid / gap) admixture of the runner-up, and can even pass the
  // residual stop with an arbitrary direction inside the tied eigenspace.
  // By then the Krylov space holds that whole near-top eigenspace, so the
  // Ritz step recovers the principal direction to roundoff.  When the
  // iterate has truly converged the space collapses to a single vector
  // and the result is left untouched; otherwise the Ritz vector is taken
  // only if its Rayleigh quotient, recomputed in the full space, does not
  // lose to the iterate's.
  {
    std::vector<Eigen::VectorXcd> basis;
    basis.reserve(4);
    Eigen::VectorXcd w = v;
    for (int j = 0; j < 4; ++j) {
      const double pre = w.norm();
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) w -= b * b.dot(w);
      const double wn = w.norm();
      if (wn <= 1e-14 * pre) break;  // numerically dependent: space exhausted
      basis.push_back(w / wn);
      if (j + 1 < 4) w = A.apply(basis.back());
    }
    const int k = static_cast<int>(basis.size());
    if (k > 1) {
      std::vector<Eigen::VectorXcd> ab(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) ab[j] = A.apply(basis[j]);
      Eigen::MatrixXcd B(k, k);
      for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) B(r, c) = basis[r].dot(ab[c]);
      const Eigen::MatrixXcd Bh = 0.5 * (B + B.adjoint());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Bh);
      Eigen::VectorXcd ritz = Eigen::VectorXcd::Zero(n);
      for (int j = 0; j < k; ++j)
        ritz += es.eigenvectors()(j, k - 1) * basis[j];
      ritz.normalize();
      const Eigen::VectorXcd ay = A.apply(ritz);
      const double ritz_lambda = ritz.dot(ay).real();
      if (ritz_lambda >= lambda) {
        v = ritz;
        lambda = ritz_lambda;
        resid = (ay - ritz_lambda * ritz).norm();
      }
    }
  }

  out.lambda_max = lambda;
  out.v = v;
  out.iterations = iters;
  out.residual = resid;

  // gauge: rotate the first significant component to the positive real axis
  for (int i = 0; i < n; ++i) {
    const double mag = std::abs(out.v[i]);
    if (mag > 1e-12) {
      out.v *= std::conj(out.v[i]) / mag;
      out.v[i] = mag;
      break;
    }
  }

  const double second = estimate_second_eigenvalue(A, lambda, out.v);
  out.gap_estimate = std::clamp((lambda - second) / lambda, 0.0, 1.0);
  out.degenerate = out.degenerate || out.gap_estimate < opts.degenerate_gap;
  return out;
}

MonteCarloEstimate monte_carlo_expected_snr(const Eigen::VectorXd& x,
                                            const Eigen::VectorXcd& w,
                                            const Scenario& scenario,
                                            int user_index,
                                            std::uint64_t num_samples,
                                            std::uint64_t seed) {
  const int N = scenario.num_antennas();
  const int M = scenario.num_users();
  if (user_index < 0 || user_index >= M)
    throw ConfigError("user index out of range");
  if (num_samples == 0) throw ConfigError("need at least one sample");
  if (x.size() != N || w.size() != N)
    throw ConfigError("position/beamformer vectors must have one entry per waveguide");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0 && x[i] <= scenario.layout.region_side_m))
      throw ConfigError("antenna position outside [0, L]");

  const User& user = scenario.users[user_index];

  // per-link contribution to h^H w when the link is unblocked
  Eigen::VectorXcd a(N);
  Eigen::VectorXd p(N);
  for (int i = 0; i < N; ++i) {
    const detail::LinkState st =
        detail::link_state(x[i], scenario.layout.waveguide_y_m[i], user,
                           scenario.constants, scenario.layout.height_m);
    a[i] = std::conj(st.h) * w[i];
    p[i] = st.p_los;
  }

  // same stream and counter layout as sample_blockage, restricted to this
  // user's column
  const std::uint64_t stream =
      rng::substream(seed, rng::Stream::kBlockage);
  const auto uN = static_cast<std::uint64_t>(N);
  const auto uM = static_cast<std::uint64_t>(M);
  const auto um = static_cast<std::uint64_t>(user_index);

  double mean = 0.0;
  double m2 = 0.0;  // Welford: exact for constant streams
  for (std::uint64_t s = 0; s < num_samples; ++s) {
    std::complex<double> acc = 0.0;
    for (std::uint64_t i = 0; i < uN; ++i)
      if (rng::uniform01(stream, (s * uN + i) * uM + um) <
          p[static_cast<Eigen::Index>(i)])
        acc += a[static_cast<Eigen::Index>(i)];
    const double val = std::norm(acc) / user.noise_power_w;
    const double delta = val - mean;
    mean += delta / static_cast<double>(s + 1);
    m2 += delta * (val - mean);
  }

  MonteCarloEstimate est;
  est.mean = mean;
  est.num_samples = num_samples;
  est.std_error =
      num_samples > 1
          ? std::sqrt(m2 / (static_cast<double>(num_samples - 1) *
                            static_cast<double>(num_samples)))
          : 0.0;
  return est;
}

}  // namespace pinchopt

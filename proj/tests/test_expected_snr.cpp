// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "pinchopt/channel.hpp"
#include "pinchopt/errors.hpp"
#include "pinchopt/expected_snr.hpp"
#include "pinchopt/rng.hpp"
#include "pinchopt/scenario.hpp"

using namespace pinchopt;

namespace {

// Hand-rolled deterministic draws for property tests.
struct Draw {
  std::uint64_t stream;
  std::uint64_t ctr = 0;
  explicit Draw(std::uint64_t seed) : stream(rng::substream(seed, rng::Stream::kValidation)) {}
  double u() { return rng::uniform01(stream, ctr++); }
  double normal() {
    const double u1 = rng::uniform01_open(stream, ctr++);
    const double u2 = rng::uniform01(stream, ctr++);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::complex<double> znormal() {
    const double re = normal();
    return {re, normal()};
  }
};

ExpectedSnrMatrix random_factored(Draw& d, int n, bool with_diag = true) {
  ExpectedSnrMatrix A;
  A.u.resize(n);
  A.v_diag.resize(n);
  const double scale = std::pow(10.0, 6.0 * d.u() - 3.0);
  for (int i = 0; i < n; ++i) {
    A.u[i] = d.znormal() * scale;
    A.v_diag[i] = with_diag ? std::abs(d.normal()) * scale * scale : 0.0;
  }
  return A;
}

Eigen::VectorXcd random_unit(Draw& d, int n) {
  Eigen::VectorXcd w(n);
  for (int i = 0; i < n; ++i) w[i] = d.znormal();
  w.normalize();
  return w;
}

Scenario default_scenario(int n_ant, int n_users, std::uint64_t seed = 1,
                          double epsilon = 0.05) {
  ScenarioConfig cfg;
  cfg.N = n_ant;
  cfg.M = n_users;
  cfg.seed = seed;
  cfg.epsilon = epsilon;
  return make_scenario(cfg);
}

}  // namespace

TEST_CASE("factored matrix agrees with the channel module entry by entry") {
  const auto s = default_scenario(4, 3, 17);
  Eigen::VectorXd x(4);
  x << 1.0, 6.0, 13.0, 19.0;

  const auto H = channel_matrix(x, s);
  const auto P = los_probability_matrix(x, s);
  for (int m = 0; m < 3; ++m) {
    const auto A =
        build_expected_matrix(x, s.users[m], s.constants, s.layout);
    REQUIRE(A.size() == 4);
    for (int n = 0; n < 4; ++n) {
      CHECK(A.u[n] == P(n, m) * H(n, m));
      CHECK(A.v_diag[n] ==
            doctest::Approx(P(n, m) * (1.0 - P(n, m)) * std::norm(H(n, m)))
                .epsilon(1e-14));
      CHECK(A.v_diag[n] >= 0.0);
    }
    // no blockers: the diagonal part vanishes identically
    auto clear = s;
    clear.constants.blockage_density_per_m2 = 0.0;
    const auto A0 =
        build_expected_matrix(x, clear.users[m], clear.constants, clear.layout);
    CHECK(A0.v_diag.isZero(0.0));
  }
}

TEST_CASE("dense expansion, trace and O(N) apply agree") {
  Draw d(101);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(d.u() * 8.0);
    const auto A = random_factored(d, n);
    const auto D = A.dense();

    CHECK((D - D.adjoint()).norm() == 0.0);  // Hermitian by construction
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const std::complex<double> want =
            A.u[i] * std::conj(A.u[j]) +
            (i == j ? std::complex<double>(A.v_diag[i], 0.0) : 0.0);
        CHECK(std::abs(D(i, j) - want) <= 1e-14 * std::abs(want) + 1e-300);
      }

    CHECK(A.trace() == doctest::Approx(D.trace().real()).epsilon(1e-13));

    const auto w = random_unit(d, n);
    const Eigen::VectorXcd fast = A.apply(w);
    const Eigen::VectorXcd slow = D * w;
    CHECK((fast - slow).norm() <= 1e-12 * slow.norm());
  }
}

TEST_CASE("quadratic-form snr matches the dense matrix and is gauge invariant") {
  Draw d(202);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(d.u() * 8.0);
    const auto A = random_factored(d, n);
    const auto w = random_unit(d, n);
    const double sigma2 = 1e-14;

    const double got = expected_snr_multi(A, w, sigma2);
    const double want = (w.adjoint() * A.dense() * w)(0, 0).real() / sigma2;
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got >= 0.0);

    // a common phase on w changes nothing
    const auto rotated =
        (w * std::polar(1.0, 2.0 * std::numbers::pi * d.u())).eval();
    CHECK(expected_snr_multi(A, rotated, sigma2) ==
          doctest::Approx(got).epsilon(1e-12));
  }

  ExpectedSnrMatrix A;
  A.u.resize(2);
  A.v_diag.resize(2);
  CHECK_THROWS_AS(expected_snr_multi(A, Eigen::VectorXcd::Ones(3), 1e-14),
                  ConfigError);
  CHECK_THROWS_AS(expected_snr_multi(A, Eigen::VectorXcd::Ones(2), 0.0),
                  ConfigError);
}

TEST_CASE("single-antenna snr at a canonical geometry") {
  const auto pc = derive_constants(28e9, 1.4, 0.05);
  User u;
  u.position_m = {10.0, 0.0, 0.0};
  u.snr_target_linear = 100.0;
  u.noise_power_w = 1e-14;

  // directly above the user: t = d_z^2 = 100
  const double got = expected_snr_single(10.0, 1.0, u, pc, 10.0);
  const double want = 1.0 * pc.path_gain_const * std::exp(-5.0) / (1e-14 * 100.0);
  CHECK(got == doctest::Approx(want).epsilon(1e-14));
  CHECK(got == doctest::Approx(4.891e3).epsilon(1e-3));
  CHECK(10.0 * std::log10(got) == doctest::Approx(36.9).epsilon(1e-3));

  CHECK(expected_snr_single(10.0, 0.0, u, pc, 10.0) == 0.0);
  CHECK_THROWS_AS(expected_snr_single(10.0, -1.0, u, pc, 10.0), ConfigError);

  User coincident;
  coincident.position_m = {10.0, 0.0, 10.0};
  CHECK_THROWS_AS(expected_snr_single(10.0, 1.0, coincident, pc, 10.0),
                  NumericalError);
}

TEST_CASE("single-antenna snr equals the general form on one waveguide") {
  // N = 1 layout puts the waveguide at y = 0, matching the scalar routine.
  const auto s = default_scenario(1, 4, 23);
  Eigen::VectorXd x(1);
  for (double xv : {0.0, 3.7, 11.2, 20.0}) {
    x << xv;
    for (const auto& u : s.users) {
      const auto A = build_expected_matrix(x, u, s.constants, s.layout);
      const double P = 2.5e-3;
      Eigen::VectorXcd w(1);
      w << std::sqrt(P);
      const double gen = expected_snr_multi(A, w, u.noise_power_w);
      const double special =
          expected_snr_single(xv, P, u, s.constants, s.layout.height_m);
      CHECK(gen == doctest::Approx(special).epsilon(1e-12));
    }
  }
}

TEST_CASE("dominant eigenpair matches a dense solver on random instances") {
  Draw d(303);
  int degenerate_seen = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(d.u() * 7.0);
    const auto A = random_factored(d, n);
    const auto pair = largest_eigenpair(A);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A.dense());
    const double lam_dense = es.eigenvalues().maxCoeff();

    CHECK(std::abs(pair.lambda_max - lam_dense) <= 1e-10 * lam_dense);
    CHECK(std::abs(pair.v.norm() - 1.0) <= 1e-12);
    CHECK((A.apply(pair.v) - pair.lambda_max * pair.v).norm() <=
          1e-10 * A.trace());

    if (!pair.degenerate) {
      const Eigen::VectorXcd vd = es.eigenvectors().col(n - 1);
      CHECK(std::abs(pair.v.dot(vd)) >= 1.0 - 1e-8);
    } else {
      ++degenerate_seen;
    }
  }
  CHECK(degenerate_seen <= 3);  // generic random instances have clear gaps
}

TEST_CASE("dominant eigenvalue respects its closed-form bounds") {
  Draw d(404);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + static_cast<int>(d.u() * 8.0);
    const auto A = random_factored(d, n);
    const auto pair = largest_eigenpair(A);
    const double slack = 1e-11 * A.trace();

    CHECK(pair.lambda_max >= A.u.squaredNorm() - slack);
    for (int i = 0; i < n; ++i)
      CHECK(pair.lambda_max >= A.v_diag[i] + std::norm(A.u[i]) - slack);
    CHECK(pair.lambda_max <= A.trace() + slack);
  }
}

TEST_CASE("eigenpair limit cases") {
  SUBCASE("rank one") {
    Draw d(505);
    const int n = 5;
    auto A = random_factored(d, n, /*with_diag=*/false);
    const auto pair = largest_eigenpair(A);
    CHECK(pair.lambda_max ==
          doctest::Approx(A.u.squaredNorm()).epsilon(1e-13));
    // eigenvector is u up to the fixed gauge
    const Eigen::VectorXcd uhat = A.u.normalized();
    CHECK(std::abs(pair.v.dot(uhat)) >= 1.0 - 1e-12);
    CHECK(pair.gap_estimate >= 0.999);
  }

  SUBCASE("diagonal") {
    ExpectedSnrMatrix A;
    A.u = Eigen::VectorXcd::Zero(4);
    A.v_diag.resize(4);
    A.v_diag << 1.0, 7.0, 3.0, 2.0;
    const auto pair = largest_eigenpair(A);
    CHECK(pair.lambda_max == 7.0);
    CHECK(pair.v[1] == std::complex<double>(1.0, 0.0));
    CHECK(pair.degenerate == false);
    CHECK(pair.gap_estimate == doctest::Approx((7.0 - 3.0) / 7.0));
  }

  SUBCASE("diagonal with a tied maximum is flagged") {
    ExpectedSnrMatrix A;
    A.u = Eigen::VectorXcd::Zero(3);
    A.v_diag.resize(3);
    A.v_diag << 5.0, 5.0, 1.0;
    const auto pair = largest_eigenpair(A);
    CHECK(pair.lambda_max == 5.0);
    CHECK(pair.degenerate == true);
  }

  SUBCASE("one by one is exact") {
    ExpectedSnrMatrix A;
    A.u.resize(1);
    A.v_diag.resize(1);
    A.u << std::complex<double>(3.0, -4.0);
    A.v_diag << 2.0;
    const auto pair = largest_eigenpair(A);
    CHECK(pair.lambda_max == 27.0);  // |u|^2 + v
    CHECK(pair.v[0] == std::complex<double>(1.0, 0.0));
    CHECK(pair.degenerate == false);
  }

  SUBCASE("zero matrix is degenerate") {
    ExpectedSnrMatrix A;
    A.u = Eigen::VectorXcd::Zero(3);
    A.v_diag = Eigen::VectorXd::Zero(3);
    const auto pair = largest_eigenpair(A);
    CHECK(pair.lambda_max == 0.0);
    CHECK(pair.degenerate == true);
  }

  SUBCASE("empty matrix is rejected") {
    ExpectedSnrMatrix A;
    A.u.resize(0);
    A.v_diag.resize(0);
    CHECK_THROWS_AS(largest_eigenpair(A), ConfigError);
  }
}

TEST_CASE("eigenvector gauge fixes the first significant component") {
  Draw d(606);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(d.u() * 6.0);
    const auto A = random_factored(d, n);
    const auto pair = largest_eigenpair(A);
    for (int i = 0; i < n; ++i) {
      const double mag = std::abs(pair.v[i]);
      if (mag > 1e-12) {
        CHECK(pair.v[i].real() > 0.0);
        CHECK(std::abs(pair.v[i].imag()) <= 1e-12 * mag);
        break;
      }
    }
  }
}

TEST_CASE("monte carlo mean sits inside three standard errors") {
  Draw d(707);
  for (std::uint64_t seed : {31ull, 32ull, 33ull, 34ull}) {
    const int n = 2 + static_cast<int>(d.u() * 5.0);
    const auto s = default_scenario(n, 3, seed);
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = 20.0 * d.u();
    const auto w = (random_unit(d, n) * 1e-3).eval();

    const int m = static_cast<int>(d.u() * 3.0);
    const auto A = build_expected_matrix(x, s.users[m], s.constants, s.layout);
    const double closed = expected_snr_multi(A, w, s.users[m].noise_power_w);

    const auto est = monte_carlo_expected_snr(x, w, s, m, 200000, seed);
    CHECK(est.num_samples == 200000);
    CHECK(std::abs(est.mean - closed) <= 3.0 * est.std_error + 1e-12 * closed);
  }
}

TEST_CASE("monte carlo with certain links has zero variance") {
  const auto s = default_scenario(3, 2, 9, /*epsilon=*/0.0);
  Eigen::VectorXd x(3);
  x << 2.0, 9.0, 18.0;
  Eigen::VectorXcd w(3);
  w << std::complex<double>(1e-3, 2e-4), std::complex<double>(-3e-4, 1e-3),
      std::complex<double>(5e-4, -5e-4);

  const auto est = monte_carlo_expected_snr(x, w, s, 0, 1000, 5);
  const auto A = build_expected_matrix(x, s.users[0], s.constants, s.layout);
  const double closed = expected_snr_multi(A, w, s.users[0].noise_power_w);

  CHECK(est.std_error == 0.0);
  CHECK(est.mean == doctest::Approx(closed).epsilon(1e-13));
}

TEST_CASE("monte carlo edge cases") {
  const auto s = default_scenario(2, 2, 4);
  Eigen::VectorXd x(2);
  x << 5.0, 15.0;
  const Eigen::VectorXcd w0 = Eigen::VectorXcd::Zero(2);

  const auto zero = monte_carlo_expected_snr(x, w0, s, 0, 100, 1);
  CHECK(zero.mean == 0.0);
  CHECK(zero.std_error == 0.0);

  Eigen::VectorXcd w(2);
  w << 1e-3, 1e-3;
  const auto one = monte_carlo_expected_snr(x, w, s, 0, 1, 1);
  CHECK(one.num_samples == 1);
  CHECK(one.std_error == 0.0);  // a single draw has no spread estimate

  const auto a = monte_carlo_expected_snr(x, w, s, 1, 5000, 8);
  const auto b = monte_carlo_expected_snr(x, w, s, 1, 5000, 8);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);

  CHECK_THROWS_AS(monte_carlo_expected_snr(x, w, s, -1, 100, 1), ConfigError);
  CHECK_THROWS_AS(monte_carlo_expected_snr(x, w, s, 2, 100, 1), ConfigError);
  CHECK_THROWS_AS(monte_carlo_expected_snr(x, w, s, 0, 0, 1), ConfigError);
  Eigen::VectorXd oob(2);
  oob << 5.0, 21.0;
  CHECK_THROWS_AS(monte_carlo_expected_snr(oob, w, s, 0, 100, 1), ConfigError);
}

TEST_CASE("position checks on the factored matrix builder") {
  const auto s = default_scenario(2, 1, 6);
  Eigen::VectorXd bad(1);
  bad << 5.0;
  CHECK_THROWS_AS(build_expected_matrix(bad, s.users[0], s.constants, s.layout),
                  ConfigError);
  Eigen::VectorXd oob(2);
  oob << -0.5, 5.0;
  CHECK_THROWS_AS(build_expected_matrix(oob, s.users[0], s.constants, s.layout),
                  ConfigError);
}

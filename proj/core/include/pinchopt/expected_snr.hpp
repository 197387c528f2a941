// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>

#include "pinchopt/scenario.hpp"

namespace pinchopt {

// Blockage-averaged SNR matrix for one user, kept in factored form
//   A = u u^H + diag(v),  u_n = p_n h_n,  v_n = p_n (1 - p_n) |h_n|^2,
// so matrix-vector products cost O(N).
struct ExpectedSnrMatrix {
  Eigen::VectorXcd u;
  Eigen::VectorXd v_diag;

  int size() const { return static_cast<int>(u.size()); }
  double trace() const;  // ||u||^2 + sum(v)
  Eigen::VectorXcd apply(const Eigen::VectorXcd& w) const;
  Eigen::MatrixXcd dense() const;
};

ExpectedSnrMatrix build_expected_matrix(const Eigen::VectorXd& x,
                                        const User& user,
                                        const PhysicalConstants& pc,
                                        const WaveguideLayout& layout);

// E[SNR] = w^H A w / sigma^2, evaluated through the factored form (real and
// nonnegative by construction).
double expected_snr_multi(const ExpectedSnrMatrix& A,
                          const Eigen::VectorXcd& w, double noise_power_w);

// Single-antenna special case: E[SNR] = P eta e^{-eps t} / (sigma^2 t) with
// t the squared antenna-user distance.  The waveguide runs at y = 0.
double expected_snr_single(double x, double power_w, const User& user,
                           const PhysicalConstants& pc, double height_m);

struct EigenPair {
  double lambda_max = 0.0;
  Eigen::VectorXcd v;          // unit norm; first component above 1e-12 is real positive
  double gap_estimate = 1.0;   // (lambda1 - lambda2) / lambda1, clamped to [0, 1]
  bool degenerate = false;     // eigenvector direction not trustworthy
  int iterations = 0;
  double residual = 0.0;       // ||A v - lambda v|| at exit
};

struct EigenOptions {
  double rayleigh_tol = 1e-13;      // relative |delta lambda| between sweeps
  double residual_tol = 1e-10;      // residual <= residual_tol * trace(A)
  int max_iterations = 100000;
  // Below this relative gap the dominant direction is ambiguous at our
  // residual target, so the pair is flagged and callers fall back to
  // finite differences for derivatives.
  double degenerate_gap = 2e-4;
  // A capped run is still accepted (flagged) while the defect is small.
  double accept_residual_tol = 1e-5;
};

// Dominant eigenpair by power iteration on the factored form.  The rank-one
// term fixes the start phases (the iterate keeps a positive overlap with the
// dominant eigenvector), the gap estimate comes from a short deflated
// iteration, and NumericalError carries the residual if the defect at the
// iteration cap is still large.
EigenPair largest_eigenpair(const ExpectedSnrMatrix& A,
                            const EigenOptions& opts = {});

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(num_samples); 0 when S = 1
  std::uint64_t num_samples = 0;
};

// Empirical mean of the instantaneous SNR of user `user_index` over
// `num_samples` independent blockage draws (the same stream/counter layout
// as sample_blockage).  Welford accumulation: a constant stream yields the
// value exactly and a std error of exactly 0.
MonteCarloEstimate monte_carlo_expected_snr(const Eigen::VectorXd& x,
                                            const Eigen::VectorXcd& w,
                                            const Scenario& scenario,
                                            int user_index,
                                            std::uint64_t num_samples,
                                            std::uint64_t seed);

namespace detail {

// No bounds checks: finite-difference stencils step just outside [0, L].
ExpectedSnrMatrix build_expected_matrix_unchecked(const Eigen::VectorXd& x,
                                                  const User& user,
                                                  const PhysicalConstants& pc,
                                                  const WaveguideLayout& layout);

}  // namespace detail

}  // namespace pinchopt

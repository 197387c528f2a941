// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>

#include "pinchopt/scenario.hpp"

namespace pinchopt {

// Probability that the antenna-user link is unobstructed: exp(-eps * d^2)
// with d the 3-D antenna-user distance.
double los_probability(const Eigen::Vector3d& antenna_pos,
                       const Eigen::Vector3d& user_pos,
                       double blockage_density_per_m2);

// Line-of-sight response between the radiator at x meters along waveguide n
// and one user: spherical spreading sqrt(eta)/d and the phase accumulated
// over the air path d plus the in-guide path x.  The phase argument is
// formed unreduced; std::polar does the range reduction.
std::complex<double> los_channel(double x, int waveguide_index,
                                 const User& user,
                                 const PhysicalConstants& pc,
                                 const WaveguideLayout& layout);

// N x M matrix H with H(n, m) = los_channel(x[n], n, user m).
Eigen::MatrixXcd channel_matrix(const Eigen::VectorXd& x,
                                const Scenario& scenario);

// N x M matrix of link probabilities at the same positions.
Eigen::MatrixXd los_probability_matrix(const Eigen::VectorXd& x,
                                       const Scenario& scenario);

// One Bernoulli blockage draw per link.  Entry (n, m) of sample s uses
// counter (s*N + n)*M + m of the blockage stream, so every draw is a pure
// function of (seed, s, n, m, N, M) and extending a Monte Carlo run
// reproduces the earlier samples bit for bit.
Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>
sample_blockage(const Eigen::MatrixXd& link_probabilities, std::uint64_t seed,
                std::uint64_t sample_index);

// |h^H w|^2 / sigma^2 for one realized channel column and beamformer.
double instantaneous_snr(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w,
                         double noise_power_w);

namespace detail {

// Geometry, probability and response of a single link; no bounds checks so
// finite-difference stencils may step outside [0, L].
struct LinkState {
  double distance_m = 0.0;
  double p_los = 0.0;
  double gain_sq = 0.0;  // |h|^2 = eta / d^2
  std::complex<double> h;
};

LinkState link_state(double x, double waveguide_y, const User& user,
                     const PhysicalConstants& pc, double height_m);

}  // namespace detail

}  // namespace pinchopt

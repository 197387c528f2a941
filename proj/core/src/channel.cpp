// SPDX-License-Identifier: Apache-2.0
#include "pinchopt/channel.hpp"

#include <cmath>
#include <numbers>

#include "pinchopt/errors.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

double los_probability(const Eigen::Vector3d& antenna_pos,
                       const Eigen::Vector3d& user_pos,
                       double blockage_density_per_m2) {
  if (!(blockage_density_per_m2 >= 0.0))
    throw ConfigError("blockage density must be >= 0");
  return std::exp(-blockage_density_per_m2 *
                  (antenna_pos - user_pos).squaredNorm());
}

namespace detail {

LinkState link_state(double x, double waveguide_y, const User& user,
                     const PhysicalConstants& pc, double height_m) {
  const double dx = x - user.position_m.x();
  const double dy = waveguide_y - user.position_m.y();
  const double dz = height_m - user.position_m.z();
  const double d2 = dx * dx + dy * dy + dz * dz;

  LinkState st;
  st.distance_m = std::sqrt(d2);
  if (!(st.distance_m > 0.0))
    throw NumericalError("antenna coincides with user: channel is singular");
  st.p_los = std::exp(-pc.blockage_density_per_m2 * d2);
  st.gain_sq = pc.path_gain_const / d2;
  // in-guide phase runs over the distance from the feed, i.e. x itself
  const double phase =
      -2.0 * std::numbers::pi * (st.distance_m / pc.free_space_wavelength_m +
                                 x / pc.waveguide_wavelength_m);
  st.h = std::polar(std::sqrt(pc.path_gain_const) / st.distance_m, phase);
  return st;
}

}  // namespace detail

namespace {

void check_positions(const Eigen::VectorXd& x, const Scenario& s) {
  if (x.size() != s.num_antennas())
    throw ConfigError("antenna position vector must have one entry per waveguide");
  for (Eigen::Index n = 0; n < x.size(); ++n)
    if (!(x[n] >= 0.0 && x[n] <= s.layout.region_side_m))
      throw ConfigError("antenna position outside [0, L]");
}

}  // namespace

std::complex<double> los_channel(double x, int waveguide_index,
                                 const User& user,
                                 const PhysicalConstants& pc,
                                 const WaveguideLayout& layout) {
  if (waveguide_index < 0 || waveguide_index >= layout.num_antennas)
    throw ConfigError("waveguide index out of range");
  if (!(x >= 0.0 && x <= layout.region_side_m))
    throw ConfigError("antenna position outside [0, L]");
  return detail::link_state(x, layout.waveguide_y_m[waveguide_index], user, pc,
                            layout.height_m)
      .h;
}

Eigen::MatrixXcd channel_matrix(const Eigen::VectorXd& x,
                                const Scenario& scenario) {
  check_positions(x, scenario);
  const int N = scenario.num_antennas();
  const int M = scenario.num_users();
  Eigen::MatrixXcd H(N, M);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n)
      H(n, m) = detail::link_state(x[n], scenario.layout.waveguide_y_m[n],
                                   scenario.users[m], scenario.constants,
                                   scenario.layout.height_m)
                    .h;
  return H;
}

Eigen::MatrixXd los_probability_matrix(const Eigen::VectorXd& x,
                                       const Scenario& scenario) {
  check_positions(x, scenario);
  const int N = scenario.num_antennas();
  const int M = scenario.num_users();
  Eigen::MatrixXd P(N, M);
  for (int m = 0; m < M; ++m)
    for (int n = 0; n < N; ++n)
      P(n, m) = detail::link_state(x[n], scenario.layout.waveguide_y_m[n],
                                   scenario.users[m], scenario.constants,
                                   scenario.layout.height_m)
                    .p_los;
  return P;
}

Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>
sample_blockage(const Eigen::MatrixXd& link_probabilities, std::uint64_t seed,
                std::uint64_t sample_index) {
  const auto N = static_cast<std::uint64_t>(link_probabilities.rows());
  const auto M = static_cast<std::uint64_t>(link_probabilities.cols());
  for (Eigen::Index i = 0; i < link_probabilities.size(); ++i) {
    const double p = link_probabilities(i);
    if (!(p >= 0.0 && p <= 1.0))
      throw ConfigError("link probabilities must lie in [0, 1]");
  }
  const std::uint64_t stream = rng::substream(seed, rng::Stream::kBlockage);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> B(N, M);
  for (std::uint64_t n = 0; n < N; ++n)
    for (std::uint64_t m = 0; m < M; ++m) {
      const std::uint64_t counter = (sample_index * N + n) * M + m;
      B(n, m) = rng::uniform01(stream, counter) <
                        link_probabilities(static_cast<Eigen::Index>(n),
                                           static_cast<Eigen::Index>(m))
                    ? 1
                    : 0;
    }
  return B;
}

double instantaneous_snr(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w,
                         double noise_power_w) {
  if (h.size() != w.size())
    throw ConfigError("channel and beamformer dimensions differ");
  if (!(noise_power_w > 0.0)) throw ConfigError("noise power must be positive");
  return std::norm(h.dot(w)) / noise_power_w;  // h.dot(w) = h^H w
}

}  // namespace pinchopt

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace pinchopt {

inline constexpr double kSpeedOfLightMps = 2.99792458e8;  // exact, by definition

// Carrier-derived constants shared by every channel evaluation.
struct PhysicalConstants {
  double carrier_frequency_hz = 0.0;
  double refractive_index = 1.0;        // effective index of the waveguide
  double speed_of_light_m_s = kSpeedOfLightMps;
  double free_space_wavelength_m = 0.0; // c / f_c
  double waveguide_wavelength_m = 0.0;  // free_space_wavelength_m / refractive_index
  double path_gain_const = 0.0;         // (lambda / 4 pi)^2, m^2
  double blockage_density_per_m2 = 0.0; // epsilon of the exponential blockage law
};

// The two derived wavelengths and the path-gain constant are defined as
// quotients of the stored fields; computing them any other way breaks the
// exactness tests downstream.
PhysicalConstants derive_constants(double carrier_frequency_hz,
                                   double refractive_index,
                                   double blockage_density_per_m2);

// N parallel waveguides over an L x L service region at height d_z.
// Waveguide n runs along x at y_n = -L/2 + (n + 1/2) L / N, n = 0..N-1.
struct WaveguideLayout {
  int num_antennas = 0;        // N, one radiator per waveguide
  double region_side_m = 0.0;  // L
  double height_m = 0.0;       // d_z
  Eigen::VectorXd waveguide_y_m;

  // Feed point of waveguide n (x = 0 end).
  Eigen::Vector3d feed_point(int n) const;
  // Radiator position when it sits x meters along waveguide n.
  Eigen::Vector3d antenna_position(int n, double x) const;
};

WaveguideLayout build_layout(int num_antennas, double region_side_m, double height_m);

struct User {
  Eigen::Vector3d position_m = Eigen::Vector3d::Zero();  // z = 0 always
  double snr_target_linear = 1.0;
  double noise_power_w = 0.0;
};

// Per-user targets; either one entry broadcast to all users or one per user.
struct UserTargets {
  std::vector<double> snr_target_linear;
  std::vector<double> noise_power_w;
};

// Users uniform over [0,L] x [-L/2, L/2] x {0}.  Draws for user m depend
// only on (seed, m), so prefixes are stable when more users are added.
std::vector<User> sample_users(int num_users, double region_side_m,
                               const UserTargets& targets, std::uint64_t seed);

struct Scenario {
  PhysicalConstants constants;
  WaveguideLayout layout;
  std::vector<User> users;
  std::uint64_t rng_seed = 0;

  int num_antennas() const { return layout.num_antennas; }
  int num_users() const { return static_cast<int>(users.size()); }
};

// On-disk configuration (JSON).  snr_target_db and noise_power_w accept a
// scalar or a list with one entry per user.
struct ScenarioConfig {
  double f_c_hz = 28e9;
  double n_e = 1.4;
  double epsilon = 0.05;
  int N = 4;
  int M = 10;
  double L_m = 20.0;
  double d_z_m = 10.0;
  std::vector<double> snr_target_db = {20.0};
  std::vector<double> noise_power_w = {1e-14};
  std::uint64_t seed = 1;
};

// Strict parse: unknown keys and type mismatches raise ConfigError; missing
// keys keep the defaults above.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
std::string config_to_json(const ScenarioConfig& cfg);

// Stable 16-hex-digit digest of the canonical serialized form, for tagging
// result files with the exact configuration that produced them.
std::string config_digest(const ScenarioConfig& cfg);

// Validates ranges, derives constants/layout and samples users.
Scenario make_scenario(const ScenarioConfig& cfg);

// Full scenario snapshot; from_json(to_json(s)) reproduces every field
// bit-exactly (doubles round-trip through shortest-repr decimal).
std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(const std::string& json_text);

double db_to_linear(double db);
double watt_to_dbm(double watt);

}  // namespace pinchopt

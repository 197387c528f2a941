// SPDX-License-Identifier: Apache-2.0
#include "pinchopt/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "pinchopt/errors.hpp"
#include "pinchopt/rng.hpp"

namespace pinchopt {

using nlohmann::json;

PhysicalConstants derive_constants(double carrier_frequency_hz,
                                   double refractive_index,
                                   double blockage_density_per_m2) {
  if (!(carrier_frequency_hz > 0.0))
    throw ConfigError("carrier frequency must be positive");
  if (!(refractive_index >= 1.0))
    throw ConfigError("waveguide refractive index must be >= 1");
  if (!(blockage_density_per_m2 >= 0.0))
    throw ConfigError("blockage density must be >= 0");

  PhysicalConstants pc;
  pc.carrier_frequency_hz = carrier_frequency_hz;
  pc.refractive_index = refractive_index;
  pc.blockage_density_per_m2 = blockage_density_per_m2;
  pc.free_space_wavelength_m = kSpeedOfLightMps / carrier_frequency_hz;
  pc.waveguide_wavelength_m = pc.free_space_wavelength_m / refractive_index;
  const double r = pc.free_space_wavelength_m / (4.0 * std::numbers::pi);
  pc.path_gain_const = r * r;
  return pc;
}

WaveguideLayout build_layout(int num_antennas, double region_side_m,
                             double height_m) {
  if (num_antennas < 1) throw ConfigError("need at least one waveguide");
  if (!(region_side_m > 0.0)) throw ConfigError("region side must be positive");
  if (!(height_m > 0.0)) throw ConfigError("waveguide height must be positive");

  WaveguideLayout wl;
  wl.num_antennas = num_antennas;
  wl.region_side_m = region_side_m;
  wl.height_m = height_m;
  wl.waveguide_y_m.resize(num_antennas);
  const double spacing = region_side_m / num_antennas;
  for (int n = 0; n < num_antennas; ++n) {
    // (n + 1/2 - N/2) * L/N: antisymmetric in n, so mirrored waveguides
    // cancel exactly and a single waveguide sits exactly at y = 0
    wl.waveguide_y_m[n] = (n + 0.5 - 0.5 * num_antennas) * spacing;
  }
  return wl;
}

Eigen::Vector3d WaveguideLayout::feed_point(int n) const {
  return antenna_position(n, 0.0);
}

Eigen::Vector3d WaveguideLayout::antenna_position(int n, double x) const {
  if (n < 0 || n >= num_antennas)
    throw ConfigError("waveguide index out of range");
  return {x, waveguide_y_m[n], height_m};
}

std::vector<User> sample_users(int num_users, double region_side_m,
                               const UserTargets& targets,
                               std::uint64_t seed) {
  if (num_users < 1) throw ConfigError("need at least one user");
  if (!(region_side_m > 0.0)) throw ConfigError("region side must be positive");

  auto pick = [num_users](const std::vector<double>& v, int m,
                          const char* what) {
    if (v.size() == 1) return v[0];
    if (static_cast<int>(v.size()) == num_users) return v[m];
    throw ConfigError(std::string(what) +
                      " must have one entry or one per user");
  };

  const std::uint64_t stream =
      rng::substream(seed, rng::Stream::kUserPositions);
  std::vector<User> users(num_users);
  for (int m = 0; m < num_users; ++m) {
    const auto c = static_cast<std::uint64_t>(m);
    const double ux = rng::uniform01(stream, 2 * c);
    const double uy = rng::uniform01(stream, 2 * c + 1);
    users[m].position_m = {region_side_m * ux,
                           region_side_m * (uy - 0.5), 0.0};
    users[m].snr_target_linear = pick(targets.snr_target_linear, m, "snr targets");
    users[m].noise_power_w = pick(targets.noise_power_w, m, "noise powers");
    if (!(users[m].snr_target_linear > 0.0))
      throw ConfigError("snr target must be positive");
    if (!(users[m].noise_power_w > 0.0))
      throw ConfigError("noise power must be positive");
  }
  return users;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double watt_to_dbm(double watt) {
  if (!(watt > 0.0)) throw ConfigError("power must be positive to express in dBm");
  return 10.0 * std::log10(watt / 1e-3);
}

namespace {

double as_number(const json& j, const std::string& key) {
  if (!j.is_number())
    throw ConfigError("config key '" + key + "' must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& key) {
  if (!j.is_number_integer())
    throw ConfigError("config key '" + key + "' must be an integer");
  return j.get<int>();
}

std::vector<double> as_number_list(const json& j, const std::string& key) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    if (j.empty())
      throw ConfigError("config key '" + key + "' must not be an empty list");
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) {
      if (!e.is_number())
        throw ConfigError("config key '" + key +
                          "' must contain only numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  throw ConfigError("config key '" + key +
                    "' must be a number or a list of numbers");
}

json config_json(const ScenarioConfig& c) {
  json j;
  j["f_c_hz"] = c.f_c_hz;
  j["n_e"] = c.n_e;
  j["epsilon"] = c.epsilon;
  j["N"] = c.N;
  j["M"] = c.M;
  j["L_m"] = c.L_m;
  j["d_z_m"] = c.d_z_m;
  j["snr_target_db"] = c.snr_target_db;
  j["noise_power_w"] = c.noise_power_w;
  j["seed"] = c.seed;
  return j;
}

}  // namespace

ScenarioConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  ScenarioConfig cfg;
  for (const auto& [key, value] : j.items()) {
    if (key == "f_c_hz") {
      cfg.f_c_hz = as_number(value, key);
    } else if (key == "n_e") {
      cfg.n_e = as_number(value, key);
    } else if (key == "epsilon") {
      cfg.epsilon = as_number(value, key);
    } else if (key == "N") {
      cfg.N = as_int(value, key);
    } else if (key == "M") {
      cfg.M = as_int(value, key);
    } else if (key == "L_m") {
      cfg.L_m = as_number(value, key);
    } else if (key == "d_z_m") {
      cfg.d_z_m = as_number(value, key);
    } else if (key == "snr_target_db") {
      cfg.snr_target_db = as_number_list(value, key);
    } else if (key == "noise_power_w") {
      cfg.noise_power_w = as_number_list(value, key);
    } else if (key == "seed") {
      if (!value.is_number_integer())
        throw ConfigError("config key 'seed' must be an integer");
      if (!value.is_number_unsigned() && value.get<std::int64_t>() < 0)
        throw ConfigError("config key 'seed' must be nonnegative");
      cfg.seed = value.get<std::uint64_t>();
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ScenarioConfig& cfg) {
  return config_json(cfg).dump(2);
}

std::string config_digest(const ScenarioConfig& cfg) {
  const std::string s = config_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

Scenario make_scenario(const ScenarioConfig& cfg) {
  if (cfg.M < 1) throw ConfigError("M must be >= 1");

  UserTargets targets;
  targets.snr_target_linear.reserve(cfg.snr_target_db.size());
  for (double db : cfg.snr_target_db)
    targets.snr_target_linear.push_back(db_to_linear(db));
  targets.noise_power_w = cfg.noise_power_w;

  Scenario s;
  s.constants = derive_constants(cfg.f_c_hz, cfg.n_e, cfg.epsilon);
  s.layout = build_layout(cfg.N, cfg.L_m, cfg.d_z_m);
  s.users = sample_users(cfg.M, cfg.L_m, targets, cfg.seed);
  s.rng_seed = cfg.seed;
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["constants"] = {
      {"carrier_frequency_hz", s.constants.carrier_frequency_hz},
      {"refractive_index", s.constants.refractive_index},
      {"free_space_wavelength_m", s.constants.free_space_wavelength_m},
      {"waveguide_wavelength_m", s.constants.waveguide_wavelength_m},
      {"path_gain_const", s.constants.path_gain_const},
      {"blockage_density_per_m2", s.constants.blockage_density_per_m2},
  };
  j["layout"] = {
      {"num_antennas", s.layout.num_antennas},
      {"region_side_m", s.layout.region_side_m},
      {"height_m", s.layout.height_m},
      {"waveguide_y_m",
       std::vector<double>(s.layout.waveguide_y_m.begin(),
                           s.layout.waveguide_y_m.end())},
  };
  j["users"] = json::array();
  for (const auto& u : s.users) {
    j["users"].push_back({
        {"position_m", {u.position_m.x(), u.position_m.y(), u.position_m.z()}},
        {"snr_target_linear", u.snr_target_linear},
        {"noise_power_w", u.noise_power_w},
    });
  }
  j["rng_seed"] = s.rng_seed;
  return j.dump(2);
}

Scenario scenario_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  try {
    Scenario s;
    const auto& c = j.at("constants");
    s.constants.carrier_frequency_hz = c.at("carrier_frequency_hz");
    s.constants.refractive_index = c.at("refractive_index");
    s.constants.free_space_wavelength_m = c.at("free_space_wavelength_m");
    s.constants.waveguide_wavelength_m = c.at("waveguide_wavelength_m");
    s.constants.path_gain_const = c.at("path_gain_const");
    s.constants.blockage_density_per_m2 = c.at("blockage_density_per_m2");

    const auto& l = j.at("layout");
    s.layout.num_antennas = l.at("num_antennas");
    s.layout.region_side_m = l.at("region_side_m");
    s.layout.height_m = l.at("height_m");
    const auto ys = l.at("waveguide_y_m").get<std::vector<double>>();
    s.layout.waveguide_y_m =
        Eigen::Map<const Eigen::VectorXd>(ys.data(), ys.size());

    for (const auto& uj : j.at("users")) {
      User u;
      const auto pos = uj.at("position_m").get<std::vector<double>>();
      if (pos.size() != 3)
        throw ConfigError("user position must have 3 coordinates");
      u.position_m = {pos[0], pos[1], pos[2]};
      u.snr_target_linear = uj.at("snr_target_linear");
      u.noise_power_w = uj.at("noise_power_w");
      s.users.push_back(u);
    }
    s.rng_seed = j.at("rng_seed");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario JSON: ") + e.what());
  }
}

}  // namespace pinchopt

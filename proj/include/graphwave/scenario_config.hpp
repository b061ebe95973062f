#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphwave/consistency.hpp"
#include "graphwave/optimizer.hpp"
#include "graphwave/paths.hpp"
#include "graphwave/server.hpp"

namespace graphwave {

/// Fixed odometry tick of the simulated clock, seconds.
inline constexpr double kOdometryTick = 0.1;

struct DriftWindow {
  double start = 0.0;
  double end = 0.0;
  /// Bias added to the body-frame motion, per second, (rho, phi).
  Twist rate;
};

struct DegeneracyWindow {
  double start = 0.0;
  double end = 0.0;
  Eigen::Vector3d axis = Eigen::Vector3d::UnitX();
  double beta = 0.0;
};

struct RobotConfig {
  int id = 0;
  PathSpec path;
  /// Per-tick odometry noise standard deviations.
  double noise_translation = 0.002;
  double noise_rotation = 0.0005;
  std::optional<DriftWindow> drift;
  std::optional<DegeneracyWindow> degeneracy;
};

struct ScenarioConfig {
  std::optional<std::uint64_t> seed;
  double duration = 600.0;
  double node_period = 1.0;
  double submap_period = 30.0;
  double server_period = 20.0;
  double comparison_period = 20.0;
  bool ate_align = false;
  /// Standard deviations behind the odometry information matrix.
  double odometry_sigma_translation = 0.1;
  double odometry_sigma_rotation = 0.05;
  double loop_sigma_translation = 0.1;
  double loop_sigma_rotation = 0.05;
  std::vector<RobotConfig> robots;
  ServerConfig server;
  ConsistencyConfig consistency;
  SolverOptions onboard_solver;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Copies the shared and derived settings (seed, information matrices,
  /// graph radius and sigma) into the server and consistency blocks.
  void resolve();
};

/// Flat TOML-style text: `[section]` headers and `key = value` lines, '#'
/// comments. Sections: scenario, spectral, consistency, server, optimizer,
/// and robot.<id> per robot. Relative file paths resolve against `base_dir`.
/// The result is resolved and validated.
ScenarioConfig parse_scenario_config(std::istream& in,
                                     const std::filesystem::path& base_dir = {});
ScenarioConfig load_scenario_config(const std::filesystem::path& path);

/// Full resolved configuration, defaults included.
nlohmann::ordered_json to_json(const ScenarioConfig& config);

}  // namespace graphwave

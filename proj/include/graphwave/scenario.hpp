#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "graphwave/consistency.hpp"
#include "graphwave/scenario_config.hpp"
#include "graphwave/trajectory.hpp"

namespace graphwave {

struct ConstraintRecord {
  int cycle = 0;
  double time = 0.0;
  int robot = 0;
  bool update = false;
  ConstraintCandidate candidate;
};

struct ComparisonRecord {
  int cycle = 0;
  double time = 0.0;
  int robot = 0;
  std::int64_t version = 0;
  bool processed = false;
  std::string skip_reason;
  std::size_t synced = 0;
  std::size_t added = 0;
  std::size_t updated = 0;
  std::map<ConstraintKind, std::size_t> census;
  std::optional<SolveReport> solve;
};

struct BroadcastRecord {
  int cycle = 0;
  double time = 0.0;
  std::int64_t version = 0;
  std::size_t ingested = 0;
  std::size_t closures = 0;
  std::size_t representative_nodes = 0;
  std::size_t broadcast_nodes = 0;
  bool reduced = false;
  int components = 0;
  bool solver_failed = false;
  std::optional<SolveReport> solve;
  std::string note;
};

struct RobotReport {
  int robot_id = 0;
  AteReport onboard;
  AteReport corrected;
  std::optional<AteReport> server;
  Trajectory ground_truth;
  Trajectory onboard_trajectory;
  Trajectory corrected_trajectory;
  std::size_t onboard_solves = 0;
  std::size_t constraints = 0;
};

struct RunReport {
  nlohmann::ordered_json config;
  std::vector<RobotReport> robots;
  std::vector<BroadcastRecord> broadcasts;
  std::vector<ComparisonRecord> comparisons;
  std::vector<ConstraintRecord> constraints;
  /// Every LM solve of the run kept its accepted costs non-increasing.
  bool costs_monotone = true;
  std::size_t solves = 0;

  std::map<ConstraintKind, std::size_t> census() const;
  const RobotReport& robot(int id) const;
};

/// Deterministic clocked simulation: robots integrate noisy odometry at the
/// fixed tick, add a node every node period, ship finished submaps, the
/// server cycles and broadcasts, and robots compare and correct at the
/// comparison period. Periods are rounded to whole ticks.
RunReport run_scenario(const ScenarioConfig& config);

/// Ground truth and raw onboard odometry of one robot at the odometry tick.
struct SimulatedRobot {
  Trajectory ground_truth;
  Trajectory odometry;
};

SimulatedRobot simulate_robot(const RobotConfig& robot, double duration, std::uint64_t seed);

}  // namespace graphwave

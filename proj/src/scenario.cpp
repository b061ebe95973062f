#include "graphwave/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "graphwave/errors.hpp"
#include "graphwave/message.hpp"
#include "graphwave/optimizer.hpp"
#include "graphwave/server.hpp"

namespace graphwave {
namespace {

constexpr NodeId kRobotIdStride = 1'000'000;

bool monotone(const SolveReport& r) {
  for (std::size_t i = 1; i < r.accepted_costs.size(); ++i) {
    if (r.accepted_costs[i] > r.accepted_costs[i - 1]) return false;
  }
  return true;
}

std::int64_t ticks(double period) { return std::max<std::int64_t>(1, std::llround(period / kOdometryTick)); }

struct RobotRuntime {
  const RobotConfig* config = nullptr;
  SimulatedRobot sim;
  OnboardGraph graph;
  ConsistencyEngine engine;
  std::vector<PoseNode> raw_nodes;
  std::vector<Pose> node_odometry;
  std::size_t shipped = 0;
  std::size_t constraints = 0;
};

Trajectory node_trajectory(const std::vector<PoseNode>& nodes) {
  std::vector<StampedPose> out;
  out.reserve(nodes.size());
  for (const PoseNode& n : nodes) out.push_back({n.timestamp, n.pose});
  return Trajectory(std::move(out));
}

}  // namespace

std::map<ConstraintKind, std::size_t> RunReport::census() const {
  std::map<ConstraintKind, std::size_t> out{
      {ConstraintKind::adjacent, 0}, {ConstraintKind::n_hop, 0}, {ConstraintKind::submap, 0}};
  for (const ConstraintRecord& c : constraints) ++out[c.candidate.kind];
  return out;
}

const RobotReport& RunReport::robot(int id) const {
  for (const RobotReport& r : robots) {
    if (r.robot_id == id) return r;
  }
  throw ValidationError("no robot " + std::to_string(id) + " in report");
}

SimulatedRobot simulate_robot(const RobotConfig& robot, double duration, std::uint64_t seed) {
  SimulatedRobot out;
  out.ground_truth = generate_path(robot.path, duration, kOdometryTick);
  std::seed_seq seq{seed, static_cast<std::uint64_t>(robot.id) + 1};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto& gt = out.ground_truth.samples();
  std::vector<StampedPose> odom{gt.front()};
  for (std::size_t k = 1; k < gt.size(); ++k) {
    Vector6d noise;
    for (int i = 0; i < 3; ++i) noise(i) = robot.noise_translation * normal(rng);
    for (int i = 3; i < 6; ++i) noise(i) = robot.noise_rotation * normal(rng);
    const Pose rel = gt[k - 1].pose.inverse() * gt[k].pose;
    odom.push_back({gt[k].timestamp, odom.back().pose * rel * exp_map(Twist::from_vector(noise))});
  }
  out.odometry = Trajectory(std::move(odom));
  if (robot.drift) {
    const Twist step = Twist::from_vector(robot.drift->rate.vector() * kOdometryTick);
    out.odometry = inject_drift(out.odometry, robot.drift->start, robot.drift->end, step);
  }
  if (robot.degeneracy) {
    out.odometry = inject_degeneracy(out.odometry, robot.degeneracy->start, robot.degeneracy->end,
                                     robot.degeneracy->axis, robot.degeneracy->beta);
  }
  return out;
}

RunReport run_scenario(const ScenarioConfig& config) {
  config.validate();
  RunReport report;
  report.config = to_json(config);
  const std::uint64_t seed = *config.seed;

  std::vector<RobotRuntime> robots;
  robots.reserve(config.robots.size());
  std::int64_t last_tick = std::numeric_limits<std::int64_t>::max();
  for (const RobotConfig& rc : config.robots) {
    RobotRuntime rt{&rc, simulate_robot(rc, config.duration, seed),
                    OnboardGraph(rc.id, config.onboard_solver, config.consistency.odometry_information),
                    ConsistencyEngine(rc.id, config.consistency), {}, {}, 0, 0};
    last_tick = std::min<std::int64_t>(last_tick, static_cast<std::int64_t>(rt.sim.odometry.size()) - 1);
    robots.push_back(std::move(rt));
  }

  ServerState server(config.server);
  Mailbox mailbox;
  GroundTruth truth;
  std::vector<int> robot_ids;
  for (const RobotConfig& rc : config.robots) robot_ids.push_back(rc.id);

  const std::int64_t node_stride = ticks(config.node_period);
  const std::int64_t submap_stride = ticks(config.submap_period);
  const std::int64_t server_stride = ticks(config.server_period);
  const std::int64_t compare_stride = ticks(config.comparison_period);
  std::vector<Submap> pending;
  int server_cycles = 0;
  int comparison_cycles = 0;

  const auto record_solve = [&](const SolveReport& r) {
    ++report.solves;
    report.costs_monotone = report.costs_monotone && monotone(r);
  };

  for (std::int64_t tick = 0; tick <= last_tick; ++tick) {
    const double now = static_cast<double>(tick) * kOdometryTick;
    const auto k = static_cast<std::size_t>(tick);

    if (tick % node_stride == 0) {
      for (RobotRuntime& r : robots) {
        const std::size_t seq = r.raw_nodes.size();
        PoseNode node;
        node.id = r.config->id * kRobotIdStride + static_cast<NodeId>(seq);
        node.robot_id = r.config->id;
        node.submap_id = static_cast<int>(tick / submap_stride);
        node.timestamp = r.sim.odometry[k].timestamp;
        node.pose = r.sim.odometry[k].pose;
        const Pose odometry = seq == 0 ? Pose() : r.raw_nodes.back().pose.inverse() * node.pose;
        r.graph.add_node(node, odometry);
        r.raw_nodes.push_back(node);
        r.node_odometry.push_back(odometry);
        truth[node.id] = r.sim.ground_truth[k].pose;
      }
    }

    if (tick > 0 && tick % submap_stride == 0) {
      const int finished = static_cast<int>(tick / submap_stride);
      for (RobotRuntime& r : robots) {
        std::map<int, Submap> pieces;
        while (r.shipped < r.raw_nodes.size() && r.raw_nodes[r.shipped].submap_id < finished) {
          const PoseNode& n = r.raw_nodes[r.shipped];
          Submap& s = pieces[n.submap_id];
          s.robot_id = n.robot_id;
          s.submap_id = n.submap_id;
          s.nodes.push_back(n);
          s.odometry.push_back(r.node_odometry[r.shipped]);
          ++r.shipped;
        }
        for (auto& [id, s] : pieces) pending.push_back(std::move(s));
      }
    }

    if (tick > 0 && tick % server_stride == 0) {
      ServerCycleResult sc = server_cycle(server, pending, truth);
      pending.clear();
      BroadcastRecord b;
      b.cycle = server_cycles++;
      b.time = now;
      b.version = sc.message.version;
      b.ingested = sc.ingested;
      b.closures = sc.closures;
      b.representative_nodes = sc.representative_nodes;
      b.broadcast_nodes = sc.broadcast_nodes;
      b.reduced = sc.reduced;
      b.components = sc.broadcast_components;
      b.solver_failed = sc.solver_failed;
      b.note = sc.note;
      if (sc.solve) record_solve(*sc.solve);
      b.solve = std::move(sc.solve);
      report.broadcasts.push_back(std::move(b));
      if (!sc.message.nodes.empty()) mailbox.publish(sc.message, robot_ids);
    }

    if (tick > 0 && tick % compare_stride == 0) {
      const int cycle = comparison_cycles++;
      for (RobotRuntime& r : robots) {
        ComparisonRecord rec;
        rec.cycle = cycle;
        rec.time = now;
        rec.robot = r.config->id;
        const auto message = mailbox.latest(r.config->id);
        if (!message) {
          rec.skip_reason = "no server message yet";
          report.comparisons.push_back(std::move(rec));
          continue;
        }
        CycleResult cr = r.engine.run_comparison_cycle(*message, r.graph.snapshot(), now);
        rec.version = cr.version;
        rec.processed = cr.processed;
        rec.skip_reason = cr.skip_reason;
        rec.synced = cr.synced;
        rec.added = cr.added.size();
        rec.updated = cr.updated.size();
        for (ConstraintKind kind : {ConstraintKind::adjacent, ConstraintKind::n_hop, ConstraintKind::submap}) {
          rec.census[kind] = 0;
        }
        for (const auto* list : {&cr.added, &cr.updated}) {
          for (const ConstraintCandidate& c : *list) {
            ++rec.census[c.kind];
            report.constraints.push_back({cycle, now, r.config->id, list == &cr.updated, c});
          }
        }
        r.constraints += rec.added + rec.updated;
        try {
          OnboardGraph::Outcome outcome = r.graph.incorporate(cr.batch);
          if (outcome.report) record_solve(*outcome.report);
          rec.solve = std::move(outcome.report);
        } catch (const SolverError& e) {
          rec.skip_reason = std::string("onboard solve failed: ") + e.what();
        }
        report.comparisons.push_back(std::move(rec));
      }
    }
  }

  std::map<int, std::vector<PoseNode>> server_nodes;
  for (const auto& [id, node] : server.nodes()) server_nodes[node.robot_id].push_back(node);
  for (RobotRuntime& r : robots) {
    RobotReport rr;
    rr.robot_id = r.config->id;
    std::vector<StampedPose> gt;
    for (const PoseNode& n : r.raw_nodes) gt.push_back({n.timestamp, truth.at(n.id)});
    rr.ground_truth = Trajectory(std::move(gt));
    rr.onboard_trajectory = node_trajectory(r.raw_nodes);
    std::vector<PoseNode> corrected = r.graph.nodes();
    for (PoseNode& n : corrected) n.pose = r.graph.problem().variables.at(n.id);
    rr.corrected_trajectory = node_trajectory(corrected);
    rr.onboard = absolute_trajectory_error(rr.onboard_trajectory, rr.ground_truth, config.ate_align);
    rr.corrected = absolute_trajectory_error(rr.corrected_trajectory, rr.ground_truth, config.ate_align);
    auto& sn = server_nodes[rr.robot_id];
    if (sn.size() >= (config.ate_align ? 3U : 1U)) {
      std::sort(sn.begin(), sn.end(), [](const PoseNode& a, const PoseNode& b) { return a.timestamp < b.timestamp; });
      rr.server = absolute_trajectory_error(node_trajectory(sn), rr.ground_truth, config.ate_align);
    }
    rr.onboard_solves = r.graph.solve_count();
    rr.constraints = r.constraints;
    report.robots.push_back(std::move(rr));
  }
  return report;
}

}  // namespace graphwave

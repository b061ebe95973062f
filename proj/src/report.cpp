#include "graphwave/report.hpp"

#include <fstream>

#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"

namespace graphwave {
namespace {

using json = nlohmann::ordered_json;

json census_json(const std::map<ConstraintKind, std::size_t>& census) {
  json j = json::object();
  for (ConstraintKind k : {ConstraintKind::adjacent, ConstraintKind::n_hop, ConstraintKind::submap}) {
    const auto it = census.find(k);
    j[std::string(to_string(k))] = it == census.end() ? 0 : it->second;
  }
  return j;
}

json ate_json(const AteReport& a) {
  return {{"rmse", a.rmse}, {"rotation_rmse", a.rotation_rmse}, {"pairs", a.pairs}};
}

json solve_json(const std::optional<SolveReport>& r) {
  if (!r) return nullptr;
  json chi2 = json::object();
  for (const auto& [kind, v] : r->chi2) chi2[std::string(to_string(kind))] = v;
  return {{"iterations", r->iterations},
          {"initial_cost", r->initial_cost},
          {"final_cost", r->final_cost},
          {"converged", r->converged},
          {"chi2", chi2}};
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

json report_json(const RunReport& report) {
  json j;
  j["config"] = report.config;
  json robots = json::array();
  for (const RobotReport& r : report.robots) {
    json rj;
    rj["id"] = r.robot_id;
    rj["onboard_ate"] = ate_json(r.onboard);
    rj["corrected_ate"] = ate_json(r.corrected);
    rj["server_ate"] = r.server ? ate_json(*r.server) : json(nullptr);
    rj["nodes"] = r.onboard_trajectory.size();
    rj["constraints"] = r.constraints;
    rj["onboard_solves"] = r.onboard_solves;
    robots.push_back(rj);
  }
  j["robots"] = robots;
  j["constraints"] = {{"total", report.constraints.size()}, {"by_kind", census_json(report.census())}};

  json cycles = json::array();
  for (const ComparisonRecord& c : report.comparisons) {
    if (!c.processed) continue;
    cycles.push_back({{"cycle", c.cycle}, {"robot", c.robot}, {"census", census_json(c.census)}});
  }
  j["census_per_cycle"] = cycles;

  json sizes = json::array();
  for (const BroadcastRecord& b : report.broadcasts) sizes.push_back(b.broadcast_nodes);
  j["broadcast_nodes"] = sizes;

  std::size_t failures = 0;
  for (const BroadcastRecord& b : report.broadcasts) failures += b.solver_failed ? 1 : 0;
  j["solver"] = {{"solves", report.solves},
                 {"costs_monotone", report.costs_monotone},
                 {"server_failures", failures}};
  return j;
}

void emit_report(const RunReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  {
    const auto path = out_dir / "report.json";
    auto out = open_out(path);
    out << report_json(report).dump(2) << '\n';
    finish(out, path);
  }

  for (const RobotReport& r : report.robots) {
    const std::string stem = "robot" + std::to_string(r.robot_id) + "_";
    save_tum(r.onboard_trajectory, out_dir / (stem + "onboard.tum"));
    save_tum(r.corrected_trajectory, out_dir / (stem + "corrected.tum"));
    save_tum(r.ground_truth, out_dir / (stem + "ground_truth.tum"));
  }

  {
    const auto path = out_dir / "constraints.csv";
    auto out = open_out(path);
    out << "cycle,robot,kind,node,scale_band,score,from,to,action\n";
    for (const ConstraintRecord& c : report.constraints) {
      out << c.cycle << ',' << c.robot << ',' << to_string(c.candidate.kind) << ',' << c.candidate.node_id << ','
          << c.candidate.scale_band << ',' << format_double(c.candidate.score) << ',' << c.candidate.from_id << ','
          << c.candidate.to_id << ',' << (c.update ? "update" : "add") << '\n';
    }
    finish(out, path);
  }

  {
    const auto path = out_dir / "broadcast_sizes.csv";
    auto out = open_out(path);
    out << "cycle,version,representative_nodes,broadcast_nodes,reduced,components\n";
    for (const BroadcastRecord& b : report.broadcasts) {
      out << b.cycle << ',' << b.version << ',' << b.representative_nodes << ',' << b.broadcast_nodes << ','
          << (b.reduced ? 1 : 0) << ',' << b.components << '\n';
    }
    finish(out, path);
  }

  {
    const auto path = out_dir / "events.jsonl";
    auto out = open_out(path);
    for (const BroadcastRecord& b : report.broadcasts) {
      json e{{"event", "broadcast"},   {"cycle", b.cycle},
             {"time", b.time},         {"version", b.version},
             {"ingested", b.ingested}, {"closures", b.closures},
             {"nodes", b.broadcast_nodes}, {"reduced", b.reduced},
             {"solver_failed", b.solver_failed}, {"solve", solve_json(b.solve)}};
      if (!b.note.empty()) e["note"] = b.note;
      out << e.dump() << '\n';
    }
    for (const ComparisonRecord& c : report.comparisons) {
      json scores = json::array();
      for (const ConstraintRecord& r : report.constraints) {
        if (r.cycle == c.cycle && r.robot == c.robot) scores.push_back(r.candidate.score);
      }
      json e{{"event", "comparison"}, {"cycle", c.cycle},     {"time", c.time},
             {"robot", c.robot},      {"version", c.version}, {"processed", c.processed},
             {"synced", c.synced},    {"added", c.added},     {"updated", c.updated},
             {"census", census_json(c.census)}, {"scores", scores}, {"solve", solve_json(c.solve)}};
      if (!c.skip_reason.empty()) e["skip_reason"] = c.skip_reason;
      out << e.dump() << '\n';
    }
    finish(out, path);
  }
}

AteReport eval_trajectories(const std::filesystem::path& estimate,
                            const std::filesystem::path& ground_truth, bool align) {
  return absolute_trajectory_error(load_tum(estimate), load_tum(ground_truth), align);
}

}  // namespace graphwave

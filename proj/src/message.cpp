#include "graphwave/message.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "graphwave/errors.hpp"

namespace graphwave {

std::vector<PoseNode> GlobalGraphMessage::robot_nodes(int robot_id) const {
  std::vector<PoseNode> out;
  std::copy_if(nodes.begin(), nodes.end(), std::back_inserter(out),
               [&](const PoseNode& n) { return n.robot_id == robot_id; });
  std::stable_sort(out.begin(), out.end(), [](const PoseNode& a, const PoseNode& b) {
    return a.timestamp < b.timestamp || (a.timestamp == b.timestamp && a.id < b.id);
  });
  return out;
}

void write_message(const GlobalGraphMessage& message, std::ostream& out) {
  nlohmann::ordered_json header;
  header["version"] = message.version;
  header["node_count"] = message.nodes.size();
  out << header.dump() << '\n';
  for (const PoseNode& n : message.nodes) {
    const auto& t = n.pose.translation();
    const auto& q = n.pose.rotation();
    nlohmann::ordered_json j;
    j["id"] = n.id;
    j["robot"] = n.robot_id;
    j["submap"] = n.submap_id;
    j["t"] = n.timestamp;
    j["x"] = t.x();
    j["y"] = t.y();
    j["z"] = t.z();
    j["qx"] = q.x();
    j["qy"] = q.y();
    j["qz"] = q.z();
    j["qw"] = q.w();
    out << j.dump() << '\n';
  }
}

GlobalGraphMessage read_message(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  GlobalGraphMessage message;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!have_header) {
        message.version = j.at("version").get<std::int64_t>();
        expected = j.at("node_count").get<std::size_t>();
        have_header = true;
        continue;
      }
      PoseNode n;
      n.id = j.at("id").get<NodeId>();
      n.robot_id = j.at("robot").get<int>();
      n.submap_id = j.at("submap").get<int>();
      n.timestamp = j.at("t").get<double>();
      n.pose = Pose(Eigen::Quaterniond(j.at("qw").get<double>(), j.at("qx").get<double>(),
                                       j.at("qy").get<double>(), j.at("qz").get<double>()),
                    Eigen::Vector3d(j.at("x").get<double>(), j.at("y").get<double>(),
                                    j.at("z").get<double>()));
      message.nodes.push_back(n);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  if (!have_header) throw ParseError(lineno, "missing message header");
  if (message.nodes.size() != expected) {
    throw ValidationError("message header announces " + std::to_string(expected) + " nodes, found " +
                          std::to_string(message.nodes.size()));
  }
  return message;
}

void save_message(const GlobalGraphMessage& message, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_message(message, out);
}

GlobalGraphMessage load_message(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_message(in);
}

void Mailbox::publish(const GlobalGraphMessage& message, std::span<const int> robot_ids) {
  for (int r : robot_ids) boxes_[r] = message;
}

std::optional<GlobalGraphMessage> Mailbox::latest(int robot_id) const {
  const auto it = boxes_.find(robot_id);
  if (it == boxes_.end()) return std::nullopt;
  return it->second;
}

}  // namespace graphwave

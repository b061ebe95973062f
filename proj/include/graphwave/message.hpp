#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "graphwave/pose_graph.hpp"

namespace graphwave {

/// Server broadcast: optimized node poses only, no factors.
struct GlobalGraphMessage {
  std::int64_t version = 0;
  std::vector<PoseNode> nodes;

  /// Nodes of one robot sorted by timestamp.
  std::vector<PoseNode> robot_nodes(int robot_id) const;
};

/// JSON lines: a header {"version","node_count"} then one object per node
/// {"id","robot","submap","t","x","y","z","qx","qy","qz","qw"}.
void write_message(const GlobalGraphMessage& message, std::ostream& out);
GlobalGraphMessage read_message(std::istream& in);

void save_message(const GlobalGraphMessage& message, const std::filesystem::path& path);
GlobalGraphMessage load_message(const std::filesystem::path& path);

/// Per-robot latest-wins mailboxes. A delivered message replaces whatever
/// the robot had not yet read.
class Mailbox {
 public:
  void publish(const GlobalGraphMessage& message, std::span<const int> robot_ids);
  /// Latest message for the robot, if any has been delivered.
  std::optional<GlobalGraphMessage> latest(int robot_id) const;

 private:
  std::map<int, GlobalGraphMessage> boxes_;
};

}  // namespace graphwave

#include "graphwave/graph_io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "graphwave/errors.hpp"

namespace graphwave {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> tokens;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

template <typename T>
T parse_number(const std::string& token, std::size_t line) {
  T value{};
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw ParseError(line, "cannot parse number '" + token + "'");
  }
  return value;
}

Pose parse_pose(const std::vector<std::string>& tok, std::size_t offset, std::size_t line) {
  std::array<double, 7> v{};
  for (std::size_t i = 0; i < 7; ++i) v[i] = parse_number<double>(tok[offset + i], line);
  const Eigen::Quaterniond q(v[6], v[3], v[4], v[5]);
  if (!(q.norm() > 0.0)) throw ParseError(line, "zero quaternion");
  return {q, Eigen::Vector3d(v[0], v[1], v[2])};
}

void write_pose(std::ostream& out, const Pose& p) {
  const auto& t = p.translation();
  const auto& q = p.rotation();
  out << format_double(t.x()) << ' ' << format_double(t.y()) << ' ' << format_double(t.z()) << ' '
      << format_double(q.x()) << ' ' << format_double(q.y()) << ' ' << format_double(q.z()) << ' '
      << format_double(q.w());
}

struct NodeMeta {
  int robot = 0;
  int submap = 0;
  double timestamp = 0.0;
};

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace

std::string format_double(double value) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw Error("number formatting failed");
  return std::string(buf.data(), ptr);
}

PoseGraph read_g2o(std::istream& in) {
  std::vector<PoseNode> nodes;
  std::vector<PoseEdge> edges;
  std::map<NodeId, NodeMeta> meta;
  std::map<std::pair<NodeId, NodeId>, EdgeKind> kinds;
  std::vector<std::size_t> edge_lines;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split(line);
    if (tok.empty()) continue;
    if (tok[0] == "#@") {
      if (tok.size() == 6 && tok[1] == "NODE") {
        meta[parse_number<NodeId>(tok[2], lineno)] = {parse_number<int>(tok[3], lineno),
                                                      parse_number<int>(tok[4], lineno),
                                                      parse_number<double>(tok[5], lineno)};
      } else if (tok.size() == 5 && tok[1] == "EDGE") {
        const auto kind = edge_kind_from_string(tok[4]);
        if (!kind) throw ParseError(lineno, "unknown edge kind '" + tok[4] + "'");
        kinds[{parse_number<NodeId>(tok[2], lineno), parse_number<NodeId>(tok[3], lineno)}] = *kind;
      } else {
        throw ParseError(lineno, "malformed metadata line");
      }
      continue;
    }
    if (tok[0].front() == '#') continue;

    if (tok[0] == "VERTEX_SE3:QUAT") {
      if (tok.size() != 9) throw ParseError(lineno, "VERTEX_SE3:QUAT expects 8 fields");
      PoseNode n;
      n.id = parse_number<NodeId>(tok[1], lineno);
      n.pose = parse_pose(tok, 2, lineno);
      nodes.push_back(n);
    } else if (tok[0] == "EDGE_SE3:QUAT") {
      if (tok.size() != 31) throw ParseError(lineno, "EDGE_SE3:QUAT expects 30 fields");
      PoseEdge e;
      e.from = parse_number<NodeId>(tok[1], lineno);
      e.to = parse_number<NodeId>(tok[2], lineno);
      e.measurement = parse_pose(tok, 3, lineno);
      std::size_t k = 10;
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c) {
          e.information(r, c) = e.information(c, r) = parse_number<double>(tok[k++], lineno);
        }
      }
      edges.push_back(e);
      edge_lines.push_back(lineno);
    } else {
      throw ParseError(lineno, "unknown record '" + tok[0] + "'");
    }
  }

  for (PoseNode& n : nodes) {
    if (const auto it = meta.find(n.id); it != meta.end()) {
      n.robot_id = it->second.robot;
      n.submap_id = it->second.submap;
      n.timestamp = it->second.timestamp;
    }
  }
  for (PoseEdge& e : edges) {
    if (const auto it = kinds.find({e.from, e.to}); it != kinds.end()) {
      e.kind = it->second;
    } else {
      e.kind = e.to == e.from + 1 ? EdgeKind::odometry : EdgeKind::loop_closure;
    }
  }
  return PoseGraph(std::move(nodes), std::move(edges));
}

void write_g2o(const PoseGraph& graph, std::ostream& out) {
  for (const PoseNode& n : graph.nodes()) {
    out << "VERTEX_SE3:QUAT " << n.id << ' ';
    write_pose(out, n.pose);
    out << '\n';
  }
  for (const PoseEdge& e : graph.edges()) {
    out << "EDGE_SE3:QUAT " << e.from << ' ' << e.to << ' ';
    write_pose(out, e.measurement);
    for (int r = 0; r < 6; ++r) {
      for (int c = r; c < 6; ++c) out << ' ' << format_double(e.information(r, c));
    }
    out << '\n';
  }
  for (const PoseNode& n : graph.nodes()) {
    out << "#@ NODE " << n.id << ' ' << n.robot_id << ' ' << n.submap_id << ' '
        << format_double(n.timestamp) << '\n';
  }
  for (const PoseEdge& e : graph.edges()) {
    out << "#@ EDGE " << e.from << ' ' << e.to << ' ' << to_string(e.kind) << '\n';
  }
}

PoseGraph load_g2o(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_g2o(in);
}

void save_g2o(const PoseGraph& graph, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_g2o(graph, out);
  if (!out) throw Error("write failed: " + path.string());
}

Trajectory read_tum(std::istream& in) {
  std::vector<StampedPose> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok.size() != 8) throw ParseError(lineno, "expected 8 fields, got " + std::to_string(tok.size()));
    const double t = parse_number<double>(tok[0], lineno);
    if (!samples.empty() && !(t > samples.back().timestamp)) {
      throw ValidationError("line " + std::to_string(lineno) + ": timestamps out of order");
    }
    samples.push_back({t, parse_pose(tok, 1, lineno)});
  }
  return Trajectory(std::move(samples));
}

void write_tum(const Trajectory& trajectory, std::ostream& out) {
  for (const StampedPose& s : trajectory) {
    out << format_double(s.timestamp) << ' ';
    write_pose(out, s.pose);
    out << '\n';
  }
}

Trajectory load_tum(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_tum(in);
}

void save_tum(const Trajectory& trajectory, const std::filesystem::path& path) {
  auto out = open_out(path);
  write_tum(trajectory, out);
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace graphwave

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"
#include "support/oracles.hpp"

using namespace graphwave;

namespace {

PoseGraph two_nodes() {
  PoseNode a{0, 1, 0, Pose::from_yaw(0.1, {0.5, -1.25, 0.0}), 0.0};
  PoseNode b{1, 1, 0, Pose::from_yaw(0.35, {1.3, -1.0, 0.2}), 1.0};
  PoseEdge e{0, 1, EdgeKind::odometry, a.pose.inverse() * b.pose, default_odometry_information()};
  return PoseGraph({a, b}, {e});
}

std::string to_text(const PoseGraph& g) {
  std::ostringstream out;
  write_g2o(g, out);
  return out.str();
}

}  // namespace

TEST_CASE("format_double is the shortest round-trip text") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("empty g2o text is an empty graph") {
  std::istringstream in("");
  CHECK(read_g2o(in).empty());
  std::istringstream comments("# nothing\n\n");
  CHECK(read_g2o(comments).empty());
}

TEST_CASE("two vertices and one odometry edge round-trip bit-identically") {
  const PoseGraph g = two_nodes();
  const std::string text = to_text(g);
  std::istringstream in(text);
  const PoseGraph back = read_g2o(in);
  CHECK(to_text(back) == text);
  REQUIRE(back.size() == 2);
  REQUIRE(back.edges().size() == 1);
  CHECK(back.edges()[0].kind == EdgeKind::odometry);
  CHECK(back.node(1).timestamp == 1.0);
  CHECK(back.node(1).robot_id == 1);
  CHECK((back.node(1).pose.matrix() - g.node(1).pose.matrix()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("g2o file round trip through disk") {
  const auto path = std::filesystem::temp_directory_path() / "graphwave_roundtrip.g2o";
  std::mt19937_64 rng(43);
  std::vector<PoseNode> nodes;
  std::vector<PoseEdge> edges;
  for (int i = 0; i < 30; ++i) {
    nodes.push_back({i, 0, i / 10, oracle::random_pose(rng), double(i)});
    if (i > 0) {
      edges.push_back({i - 1, i, EdgeKind::odometry, nodes[i - 1].pose.inverse() * nodes[i].pose,
                       default_odometry_information()});
    }
  }
  edges.push_back({3, 20, EdgeKind::loop_closure, nodes[3].pose.inverse() * nodes[20].pose,
                   default_odometry_information() * 2.0});
  edges.push_back({25, 4, EdgeKind::correction, Pose::from_yaw(0.2), default_odometry_information()});
  const PoseGraph g(nodes, edges);
  save_g2o(g, path);
  const PoseGraph back = load_g2o(path);
  REQUIRE(back.edges().size() == edges.size());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    CHECK(back.edges()[i].kind == edges[i].kind);
    CHECK(back.edges()[i].from == edges[i].from);
    CHECK((back.edges()[i].measurement.matrix() - edges[i].measurement.matrix()).cwiseAbs().maxCoeff() <
          1e-9);
    CHECK((back.edges()[i].information - edges[i].information).cwiseAbs().maxCoeff() < 1e-9);
  }
  for (const auto& n : nodes) {
    CHECK((back.node(n.id).pose.matrix() - n.pose.matrix()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(back.node(n.id).submap_id == n.submap_id);
  }
  std::filesystem::remove(path);
}

TEST_CASE("edge to an unknown vertex names the id") {
  std::string text = to_text(two_nodes());
  text += "EDGE_SE3:QUAT 1 77 0 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1\n";
  std::istringstream in(text);
  try {
    read_g2o(in);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("77") != std::string::npos);
  }
}

TEST_CASE("malformed g2o lines report the line number") {
  std::istringstream in("VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\nVERTEX_SE3:QUAT 1 0 0 x 0 0 0 1\n");
  try {
    read_g2o(in);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream unknown("FOO 1 2\n");
  CHECK_THROWS_AS(read_g2o(unknown), ParseError);
}

TEST_CASE("g2o without metadata infers edge kinds") {
  std::istringstream in(
      "VERTEX_SE3:QUAT 0 0 0 0 0 0 0 1\n"
      "VERTEX_SE3:QUAT 1 1 0 0 0 0 0 1\n"
      "VERTEX_SE3:QUAT 2 2 0 0 0 0 0 1\n"
      "EDGE_SE3:QUAT 0 1 1 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1\n"
      "EDGE_SE3:QUAT 0 2 2 0 0 0 0 0 1 1 0 0 0 0 0 1 0 0 0 0 1 0 0 0 1 0 0 1 0 1\n");
  const PoseGraph g = read_g2o(in);
  CHECK(g.edges()[0].kind == EdgeKind::odometry);
  CHECK(g.edges()[1].kind == EdgeKind::loop_closure);
}

TEST_CASE("pose graph invariants") {
  const PoseNode a{0, 0, 0, Pose(), 0.0};
  const PoseNode b{1, 0, 0, Pose(), 1.0};
  CHECK_THROWS_AS(PoseGraph({a, a}, {}), ValidationError);
  PoseEdge bad{0, 1, EdgeKind::loop_closure, Pose(), -Information::Identity()};
  CHECK_THROWS_AS(PoseGraph({a, b}, {bad}), ValidationError);
  PoseEdge backwards{1, 0, EdgeKind::odometry, Pose(), default_odometry_information()};
  CHECK_THROWS_AS(PoseGraph({a, b}, {backwards}), ValidationError);
  CHECK_THROWS_AS(validate_information(Information::Zero()), ValidationError);
  CHECK_THROWS_AS(PoseGraph({a, b}, {}).node(5), ValidationError);
}

TEST_CASE("TUM single identity line") {
  std::istringstream in("0.0 0 0 0 0 0 0 1\n");
  const Trajectory t = read_tum(in);
  REQUIRE(t.size() == 1);
  CHECK(t[0].timestamp == 0.0);
  CHECK(t[0].pose.translation().norm() == 0.0);
  CHECK(t[0].pose.angle() == 0.0);
}

TEST_CASE("TUM out-of-order timestamps are rejected") {
  std::istringstream in("1.0 0 0 0 0 0 0 1\n0.5 0 0 0 0 0 0 1\n");
  CHECK_THROWS_AS(read_tum(in), ValidationError);
}

TEST_CASE("TUM round trip of 100 random poses") {
  std::mt19937_64 rng(47);
  std::vector<StampedPose> samples;
  for (int i = 0; i < 100; ++i) samples.push_back({0.1 * i + 1e9, oracle::random_pose(rng, 50.0)});
  const Trajectory t(samples);
  const auto path = std::filesystem::temp_directory_path() / "graphwave_roundtrip.tum";
  save_tum(t, path);
  const Trajectory back = load_tum(path);
  REQUIRE(back.size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(std::abs(back[i].timestamp - t[i].timestamp) < 1e-9);
    CHECK((back[i].pose.matrix() - t[i].pose.matrix()).cwiseAbs().maxCoeff() < 1e-9);
  }
  std::filesystem::remove(path);
}

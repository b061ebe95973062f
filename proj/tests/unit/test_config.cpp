#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"
#include "graphwave/paths.hpp"
#include "graphwave/scenario_config.hpp"

using namespace graphwave;

namespace {

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_scenario_config(in);
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const std::string kMinimal =
    "[scenario]\n"
    "seed = 3\n"
    "robots = 1\n"
    "[robot.0]\n"
    "path = \"circle\"\n";

}  // namespace

TEST_CASE("minimal config takes the documented defaults") {
  const ScenarioConfig c = parse(kMinimal);
  CHECK(*c.seed == 3);
  CHECK(c.duration == 600.0);
  CHECK(c.comparison_period == 20.0);
  CHECK(c.submap_period == 30.0);
  REQUIRE(c.robots.size() == 1);
  CHECK(c.robots[0].path.kind == PathKind::circle);
  CHECK(c.consistency.selection.top_k == 15);
  CHECK(c.consistency.selection.n_hop == 3);
  CHECK(c.consistency.num_scales == 9);
  CHECK(c.consistency.radius == 7.0);
  CHECK(c.consistency.selection.partition.adjacent_bands == 3);
  CHECK(c.server.reduction_threshold == 500);
  CHECK(c.server.seed == 3);
  CHECK(c.server.graph_radius == c.consistency.radius);
  CHECK(c.server.keyframe_translation == 0.5);
  CHECK(c.server.keyframe_rotation == doctest::Approx(15.0 * std::numbers::pi / 180.0));
}

TEST_CASE("seed is mandatory") {
  const std::string msg = error_of("[scenario]\nrobots = 1\n[robot.0]\npath = \"circle\"\n");
  CHECK(msg.find("seed") != std::string::npos);
}

TEST_CASE("config errors name the field") {
  CHECK(error_of(kMinimal + "[consistency]\ntop_kk = 3\n").find("consistency.top_kk") != std::string::npos);
  CHECK(error_of(kMinimal + "[consistency]\ntop_k = 0\n").find("consistency.top_k") != std::string::npos);
  CHECK(error_of(kMinimal + "[spectral]\nscales = 12\n").find("spectral.scales") != std::string::npos);
  CHECK(error_of(kMinimal + "[spectral]\nradius = \"far\"\n").find("spectral.radius") != std::string::npos);
  CHECK(error_of("[scenario]\nseed = 1\nrobots = 1\nduration = -5\n[robot.0]\npath = \"circle\"\n")
            .find("scenario.duration") != std::string::npos);
  CHECK(error_of("[scenario]\nseed = 1\nrobots = 1\n[robot.0]\npath = \"spiral\"\n").find("robot.0.path") !=
        std::string::npos);
  CHECK(error_of(kMinimal + "[bogus]\nx = 1\n").find("bogus") != std::string::npos);
  CHECK(error_of(kMinimal + "[robot.0]\nspeed = 1\n").find("robot.0") != std::string::npos);
  CHECK(error_of("[scenario]\nseed = 1\nrobots = 2\n[robot.0]\npath = \"circle\"\n").find("robot") !=
        std::string::npos);
}

TEST_CASE("malformed lines raise parse errors with the line") {
  try {
    parse("[scenario]\nseed = 1\nthis is not a pair\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(parse("[scenario\nseed = 1\n"), ParseError);
  CHECK_THROWS_AS(parse("seed = 1\n"), ParseError);
  CHECK_THROWS_AS(parse("[scenario]\nseed = 1\nseed = 2\n"), ParseError);
}

TEST_CASE("injection windows and paths parse") {
  const ScenarioConfig c = parse(
      "# comment\n"
      "[scenario]\nseed = 9\nrobots = 2\nduration = 120 # trailing comment\n"
      "[consistency]\ntop_k = 7\nadjacent_bands = 2\nn_hop_bands = 4\naccumulate_scales = true\n"
      "[server]\nreduction_threshold = 100\nreduction_fraction = 0.4\n"
      "[robot.0]\npath = \"polyline\"\nwaypoints = \"10, 0, 10, 10\"\n"
      "drift_start = 10\ndrift_end = 20\ndrift_y = 0.05\n"
      "[robot.1]\npath = \"corridor\"\nlength = 30\nstart_y = 2\n"
      "degeneracy_start = 30\ndegeneracy_end = 40\ndegeneracy_beta = 0.5\ndegeneracy_axis = \"0, 1, 0\"\n");
  CHECK(c.duration == 120.0);
  CHECK(c.consistency.selection.top_k == 7);
  CHECK(c.consistency.selection.partition.n_hop_bands == 4);
  CHECK(c.consistency.selection.accumulate_scales);
  CHECK(c.server.reduction_fraction == 0.4);
  REQUIRE(c.robots.size() == 2);
  REQUIRE(c.robots[0].drift.has_value());
  CHECK(c.robots[0].drift->rate.rho.y() == 0.05);
  CHECK(c.robots[0].path.waypoints.size() == 2);
  REQUIRE(c.robots[1].degeneracy.has_value());
  CHECK(c.robots[1].degeneracy->beta == 0.5);
  CHECK(c.robots[1].degeneracy->axis == Eigen::Vector3d::UnitY());
  CHECK(c.robots[1].path.start.y() == 2.0);
}

TEST_CASE("config echo includes defaults") {
  const auto j = to_json(parse(kMinimal));
  CHECK(j["scenario"]["seed"] == 3);
  CHECK(j["consistency"]["top_k"] == 15);
  CHECK(j["spectral"]["scales"] == 9);
  CHECK(j["server"]["reduction_threshold"] == 500);
  CHECK(j["robots"].size() == 1);
  CHECK(j["robots"][0]["path"] == "circle");
}

TEST_CASE("shipped scenarios load") {
  const std::filesystem::path dir = std::filesystem::path(GRAPHWAVE_SOURCE_DIR) / "scenarios";
  for (const char* name : {"drift.toml", "degeneracy.toml"}) {
    const ScenarioConfig c = load_scenario_config(dir / name);
    CHECK(c.robots.size() == 2);
    CHECK(c.seed.has_value());
  }
  CHECK_THROWS_AS(load_scenario_config(dir / "missing.toml"), Error);
}

TEST_CASE("circle path") {
  PathSpec spec;
  spec.radius = 10.0;
  spec.speed = 0.5;
  const Trajectory t = generate_path(spec, 100.0, 0.1);
  CHECK(t.size() == 1001);
  const Eigen::Vector3d center = spec.start + Eigen::Vector3d(0, spec.radius, 0);
  for (const auto& s : t) CHECK((s.pose.translation() - center).norm() == doctest::Approx(10.0));
  double length = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    length += (t[i].pose.translation() - t[i - 1].pose.translation()).norm();
  }
  CHECK(length == doctest::Approx(50.0).epsilon(1e-3));
}

TEST_CASE("corridor path goes back and forth") {
  PathSpec spec;
  spec.kind = PathKind::corridor;
  spec.length = 10.0;
  spec.speed = 1.0;
  const Trajectory t = generate_path(spec, 60.0, 0.1);
  double max_x = -1e9, min_x = 1e9;
  for (const auto& s : t) {
    max_x = std::max(max_x, s.pose.translation().x());
    min_x = std::min(min_x, s.pose.translation().x());
    CHECK(std::abs(s.pose.translation().y()) < 1e-9);
  }
  CHECK(max_x == doctest::Approx(10.0));
  CHECK(min_x == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("lawnmower and polyline paths") {
  PathSpec lawn;
  lawn.kind = PathKind::lawnmower;
  lawn.length = 20;
  lawn.width = 10;
  lawn.spacing = 5;
  const Trajectory t = generate_path(lawn, 200.0, 0.1);
  for (const auto& s : t) {
    CHECK(s.pose.translation().x() >= -1e-9);
    CHECK(s.pose.translation().x() <= 20 + 1e-9);
    CHECK(s.pose.translation().y() >= -1e-9);
    CHECK(s.pose.translation().y() <= 10 + 1e-9);
  }

  PathSpec poly;
  poly.kind = PathKind::polyline;
  CHECK_THROWS_AS(poly.validate(), ConfigError);
  poly.waypoints = {{5, 0}};
  const Trajectory p = generate_path(poly, 5.0, 0.1);
  CHECK(p.back().pose.translation().x() == doctest::Approx(2.5));
  CHECK_THROWS_AS(path_kind_from_string("spiral"), ConfigError);
}

TEST_CASE("file paths are resampled from TUM") {
  const auto path = std::filesystem::temp_directory_path() / "graphwave_path.tum";
  save_tum(Trajectory({{0.0, Pose()}, {10.0, Pose::from_translation({5, 0, 0})}}), path);
  PathSpec spec;
  spec.kind = PathKind::file;
  spec.file = path;
  const Trajectory t = generate_path(spec, 100.0, 0.5);
  CHECK(t.back().timestamp == doctest::Approx(10.0));
  CHECK(t[4].pose.translation().x() == doctest::Approx(1.0));
  std::filesystem::remove(path);
}

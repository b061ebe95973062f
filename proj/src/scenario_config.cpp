#include "graphwave/scenario_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"

namespace graphwave {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Value {
  std::string text;
  int line = 0;
  bool quoted = false;
};

class Document {
 public:
  explicit Document(std::istream& in) {
    std::string raw;
    std::string section;
    int line = 0;
    while (std::getline(in, raw)) {
      ++line;
      std::string s = strip_comment(raw, line);
      s = trim(s);
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s.back() != ']') throw ParseError(line, "unterminated section header");
        section = trim(std::string_view(s).substr(1, s.size() - 2));
        if (section.empty()) throw ParseError(line, "empty section name");
        if (sections_.contains(section)) throw ParseError(line, "duplicate section [" + section + "]");
        sections_[section];
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ParseError(line, "expected key = value");
      if (section.empty()) throw ParseError(line, "key outside of a section");
      const std::string key = trim(std::string_view(s).substr(0, eq));
      std::string val = trim(std::string_view(s).substr(eq + 1));
      if (key.empty() || val.empty()) throw ParseError(line, "expected key = value");
      Value v{val, line, false};
      if (val.front() == '"') {
        if (val.size() < 2 || val.back() != '"') throw ParseError(line, "unterminated string");
        v.text = val.substr(1, val.size() - 2);
        v.quoted = true;
      }
      if (!sections_[section].emplace(key, v).second) {
        throw ParseError(line, "duplicate key " + section + "." + key);
      }
    }
  }

  std::vector<std::string> section_names() const {
    std::vector<std::string> out;
    for (const auto& [name, keys] : sections_) out.push_back(name);
    return out;
  }

  bool has_section(const std::string& s) const { return sections_.contains(s); }

  const Value* take(const std::string& section, const std::string& key) {
    const auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    used_.insert(section + "." + key);
    return &k->second;
  }

  void reject_unused() const {
    for (const auto& [section, keys] : sections_) {
      for (const auto& [key, v] : keys) {
        if (!used_.contains(section + "." + key)) {
          throw ConfigError("unknown key " + section + "." + key + " (line " + std::to_string(v.line) + ")");
        }
      }
    }
  }

 private:
  static std::string strip_comment(const std::string& raw, int line) {
    bool in_string = false;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] == '"') in_string = !in_string;
      if (raw[i] == '#' && !in_string) return raw.substr(0, i);
    }
    if (in_string) throw ParseError(line, "unterminated string");
    return raw;
  }

  std::map<std::string, std::map<std::string, Value>> sections_;
  std::set<std::string> used_;
};

std::string where(const std::string& field, const Value& v) {
  return field + " (line " + std::to_string(v.line) + ")";
}

double to_number(const std::string& field, const Value& v) {
  if (v.quoted) throw ConfigError(where(field, v) + " must be a number");
  double out = 0.0;
  const char* end = v.text.data() + v.text.size();
  const auto [ptr, ec] = std::from_chars(v.text.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ConfigError(where(field, v) + " must be a finite number, got '" + v.text + "'");
  }
  return out;
}

class Reader {
 public:
  Reader(Document& doc, std::string section) : doc_(doc), section_(std::move(section)) {}

  void number(const char* key, double& out) {
    if (const Value* v = doc_.take(section_, key)) out = to_number(field(key), *v);
  }
  template <typename Int>
  void integer(const char* key, Int& out) {
    if (const Value* v = doc_.take(section_, key)) out = parse_int<Int>(key, *v);
  }
  void boolean(const char* key, bool& out) {
    if (const Value* v = doc_.take(section_, key)) {
      if (v->quoted || (v->text != "true" && v->text != "false")) {
        throw ConfigError(where(field(key), *v) + " must be true or false");
      }
      out = v->text == "true";
    }
  }
  const Value* text(const char* key) { return doc_.take(section_, key); }
  std::string field(const char* key) const { return section_ + "." + key; }

  template <typename Int>
  Int parse_int(const char* key, const Value& v) {
    Int out{};
    const char* end = v.text.data() + v.text.size();
    const auto [ptr, ec] = std::from_chars(v.text.data(), end, out);
    if (v.quoted || ec != std::errc() || ptr != end) {
      throw ConfigError(where(field(key), v) + " must be an integer, got '" + v.text + "'");
    }
    return out;
  }

 private:
  Document& doc_;
  std::string section_;
};

std::vector<double> number_list(const std::string& field, const Value& v) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v.text);
  while (std::getline(in, item, ',')) {
    out.push_back(to_number(field, Value{trim(item), v.line, false}));
  }
  return out;
}

Information diagonal_information(double sigma_t, double sigma_r) {
  Vector6d d;
  d << Eigen::Vector3d::Constant(1.0 / (sigma_t * sigma_t)), Eigen::Vector3d::Constant(1.0 / (sigma_r * sigma_r));
  return d.asDiagonal();
}

DistanceKind distance_kind(const std::string& field, const Value& v) {
  if (v.text == "se3") return DistanceKind::se3;
  if (v.text == "euclidean") return DistanceKind::euclidean;
  if (v.text == "rotation") return DistanceKind::rotation;
  throw ConfigError(where(field, v) + " must be se3, euclidean or rotation");
}

std::string_view to_string(DistanceKind kind) {
  switch (kind) {
    case DistanceKind::se3:
      return "se3";
    case DistanceKind::euclidean:
      return "euclidean";
    case DistanceKind::rotation:
      return "rotation";
  }
  return "unknown";
}

RobotConfig read_robot(Document& doc, int id, const std::filesystem::path& base_dir) {
  RobotConfig r;
  r.id = id;
  Reader rd(doc, "robot." + std::to_string(id));
  if (const Value* v = rd.text("path")) {
    try {
      r.path.kind = path_kind_from_string(v->text);
    } catch (const ConfigError&) {
      throw ConfigError(where(rd.field("path"), *v) + " must be circle, lawnmower, corridor, polyline or file");
    }
  }
  rd.number("speed", r.path.speed);
  rd.number("turn_rate", r.path.turn_rate);
  rd.number("start_x", r.path.start.x());
  rd.number("start_y", r.path.start.y());
  rd.number("start_z", r.path.start.z());
  rd.number("start_yaw", r.path.start_yaw);
  rd.number("radius", r.path.radius);
  rd.number("length", r.path.length);
  rd.number("width", r.path.width);
  rd.number("spacing", r.path.spacing);
  if (const Value* v = rd.text("waypoints")) {
    const auto xs = number_list(rd.field("waypoints"), *v);
    if (xs.size() % 2 != 0) throw ConfigError(where(rd.field("waypoints"), *v) + " needs x,y pairs");
    for (std::size_t i = 0; i < xs.size(); i += 2) r.path.waypoints.emplace_back(xs[i], xs[i + 1]);
  }
  if (const Value* v = rd.text("file")) {
    r.path.file = v->text;
    if (r.path.file.is_relative() && !base_dir.empty()) r.path.file = base_dir / r.path.file;
  }
  rd.number("noise_translation", r.noise_translation);
  rd.number("noise_rotation", r.noise_rotation);

  DriftWindow drift;
  bool has_drift = false;
  const auto drift_number = [&](const char* key, double& out) {
    if (const Value* v = rd.text(key)) {
      out = to_number(rd.field(key), *v);
      has_drift = true;
    }
  };
  drift_number("drift_start", drift.start);
  drift_number("drift_end", drift.end);
  drift_number("drift_x", drift.rate.rho.x());
  drift_number("drift_y", drift.rate.rho.y());
  drift_number("drift_z", drift.rate.rho.z());
  drift_number("drift_roll", drift.rate.phi.x());
  drift_number("drift_pitch", drift.rate.phi.y());
  drift_number("drift_yaw", drift.rate.phi.z());
  if (has_drift) r.drift = drift;

  DegeneracyWindow deg;
  bool has_deg = false;
  const auto deg_number = [&](const char* key, double& out) {
    if (const Value* v = rd.text(key)) {
      out = to_number(rd.field(key), *v);
      has_deg = true;
    }
  };
  deg_number("degeneracy_start", deg.start);
  deg_number("degeneracy_end", deg.end);
  deg_number("degeneracy_beta", deg.beta);
  if (const Value* v = rd.text("degeneracy_axis")) {
    const auto xs = number_list(rd.field("degeneracy_axis"), *v);
    if (xs.size() != 3) throw ConfigError(where(rd.field("degeneracy_axis"), *v) + " needs three components");
    deg.axis = Eigen::Vector3d(xs[0], xs[1], xs[2]);
    has_deg = true;
  }
  if (has_deg) r.degeneracy = deg;
  return r;
}

nlohmann::ordered_json vec_json(const Eigen::VectorXd& v) {
  auto out = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

void ScenarioConfig::resolve() {
  const Information odom = diagonal_information(odometry_sigma_translation, odometry_sigma_rotation);
  server.seed = seed.value_or(0);
  server.odometry_information = odom;
  server.loop_information = diagonal_information(loop_sigma_translation, loop_sigma_rotation);
  server.graph_radius = consistency.radius;
  server.sigma = consistency.sigma;
  server.metric = consistency.metric;
  consistency.odometry_information = odom;
}

void ScenarioConfig::validate() const {
  if (!seed) throw ConfigError("scenario.seed is mandatory");
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(duration, "scenario.duration");
  positive(node_period, "scenario.node_period");
  positive(submap_period, "scenario.submap_period");
  positive(server_period, "scenario.server_period");
  positive(comparison_period, "scenario.comparison_period");
  positive(odometry_sigma_translation, "optimizer.odometry_sigma_translation");
  positive(odometry_sigma_rotation, "optimizer.odometry_sigma_rotation");
  positive(loop_sigma_translation, "server.loop_sigma_translation");
  positive(loop_sigma_rotation, "server.loop_sigma_rotation");
  if (node_period < kOdometryTick - 1e-12) throw ConfigError("scenario.node_period must be at least one odometry tick");
  if (robots.empty()) throw ConfigError("scenario.robots must be at least 1");

  positive(consistency.radius, "spectral.radius");
  positive(consistency.sigma, "spectral.sigma");
  if (consistency.num_scales < 1 || consistency.num_scales > kMaxWaveletScales) {
    throw ConfigError("spectral.scales must lie in [1, " + std::to_string(kMaxWaveletScales) + "]");
  }
  const MetricWeights& w = consistency.metric.weights;
  if (w.translation() < 0.0 || w.rotation() < 0.0 || (w.translation() == 0.0 && w.rotation() == 0.0)) {
    throw ConfigError("spectral.translation_weight and spectral.rotation_weight must be non-negative, not both zero");
  }
  const SelectionConfig& sel = consistency.selection;
  if (sel.top_k < 1) throw ConfigError("consistency.top_k must be at least 1");
  if (sel.n_hop < 1) throw ConfigError("consistency.n_hop must be at least 1");
  if (sel.partition.adjacent_bands < 0 || sel.partition.n_hop_bands < 0) {
    throw ConfigError("consistency.adjacent_bands and consistency.n_hop_bands must be non-negative");
  }
  if (sel.partition.adjacent_bands + sel.partition.n_hop_bands > consistency.num_scales) {
    throw ConfigError("consistency.adjacent_bands + consistency.n_hop_bands exceeds spectral.scales");
  }
  if (consistency.sync_tolerance < 0.0) throw ConfigError("consistency.sync_tolerance must be non-negative");
  if (consistency.ledger_translation_tolerance < 0.0) {
    throw ConfigError("consistency.ledger_translation_tolerance must be non-negative");
  }
  if (consistency.ledger_rotation_tolerance < 0.0) {
    throw ConfigError("consistency.ledger_rotation_tolerance must be non-negative");
  }
  positive(consistency.correction_information_scale, "consistency.correction_information_scale");

  if (onboard_solver.max_iterations < 0) throw ConfigError("optimizer.max_iterations must be non-negative");
  positive(onboard_solver.lambda_init, "optimizer.lambda_init");
  positive(onboard_solver.relative_tolerance, "optimizer.relative_tolerance");
  positive(onboard_solver.huber_delta, "optimizer.huber_delta");
  server.validate();

  for (const RobotConfig& r : robots) {
    const std::string p = "robot." + std::to_string(r.id) + ".";
    try {
      r.path.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(p + "path: " + e.what());
    }
    if (r.noise_translation < 0.0) throw ConfigError(p + "noise_translation must be non-negative");
    if (r.noise_rotation < 0.0) throw ConfigError(p + "noise_rotation must be non-negative");
    if (r.drift && !(r.drift->end > r.drift->start)) throw ConfigError(p + "drift_end must exceed drift_start");
    if (r.degeneracy) {
      if (!(r.degeneracy->end > r.degeneracy->start)) {
        throw ConfigError(p + "degeneracy_end must exceed degeneracy_start");
      }
      if (r.degeneracy->beta < 0.0 || r.degeneracy->beta >= 1.0) {
        throw ConfigError(p + "degeneracy_beta must lie in [0, 1)");
      }
      if (r.degeneracy->axis.norm() == 0.0) throw ConfigError(p + "degeneracy_axis must be non-zero");
    }
  }
}

ScenarioConfig parse_scenario_config(std::istream& in, const std::filesystem::path& base_dir) {
  Document doc(in);
  ScenarioConfig c;

  Reader sc(doc, "scenario");
  if (const Value* v = sc.text("seed")) c.seed = sc.parse_int<std::uint64_t>("seed", *v);
  sc.number("duration", c.duration);
  sc.number("node_period", c.node_period);
  sc.number("submap_period", c.submap_period);
  sc.number("server_period", c.server_period);
  sc.number("comparison_period", c.comparison_period);
  sc.boolean("ate_align", c.ate_align);
  int robot_count = 0;
  sc.integer("robots", robot_count);

  Reader sp(doc, "spectral");
  sp.number("radius", c.consistency.radius);
  sp.number("sigma", c.consistency.sigma);
  sp.integer("scales", c.consistency.num_scales);
  if (const Value* v = sp.text("metric")) c.consistency.metric.kind = distance_kind(sp.field("metric"), *v);
  double wt = 1.0, wr = 1.0;
  sp.number("translation_weight", wt);
  sp.number("rotation_weight", wr);
  try {
    c.consistency.metric.weights = MetricWeights(wt, wr);
  } catch (const ParameterError&) {
    throw ConfigError("spectral.translation_weight and spectral.rotation_weight must be non-negative, not both zero");
  }

  Reader cs(doc, "consistency");
  cs.integer("top_k", c.consistency.selection.top_k);
  c.consistency.selection.partition = BandPartition::thirds(std::clamp(c.consistency.num_scales, 1, kMaxWaveletScales));
  cs.integer("adjacent_bands", c.consistency.selection.partition.adjacent_bands);
  cs.integer("n_hop_bands", c.consistency.selection.partition.n_hop_bands);
  cs.integer("n_hop", c.consistency.selection.n_hop);
  cs.boolean("accumulate_scales", c.consistency.selection.accumulate_scales);
  cs.boolean("fill_from_ledger", c.consistency.selection.fill_from_ledger);
  cs.number("sync_tolerance", c.consistency.sync_tolerance);
  cs.number("ledger_translation_tolerance", c.consistency.ledger_translation_tolerance);
  cs.number("ledger_rotation_tolerance", c.consistency.ledger_rotation_tolerance);
  cs.boolean("refresh_ledger", c.consistency.refresh_ledger);
  cs.number("correction_information_scale", c.consistency.correction_information_scale);
  cs.integer("min_synced_nodes", c.consistency.min_synced_nodes);

  Reader sv(doc, "server");
  sv.number("loop_radius", c.server.loop_radius);
  sv.number("loop_dwell", c.server.loop_dwell);
  double noise_t = 0.0, noise_r = 0.0;
  sv.number("loop_noise_translation", noise_t);
  sv.number("loop_noise_rotation", noise_r);
  c.server.loop_noise << Eigen::Vector3d::Constant(noise_t), Eigen::Vector3d::Constant(noise_r);
  sv.number("loop_sigma_translation", c.loop_sigma_translation);
  sv.number("loop_sigma_rotation", c.loop_sigma_rotation);
  sv.number("keyframe_translation", c.server.keyframe_translation);
  sv.number("keyframe_rotation", c.server.keyframe_rotation);
  sv.integer("reduction_threshold", c.server.reduction_threshold);
  sv.number("reduction_fraction", c.server.reduction_fraction);
  sv.integer("max_iterations", c.server.solver.max_iterations);

  Reader op(doc, "optimizer");
  op.integer("max_iterations", c.onboard_solver.max_iterations);
  op.number("lambda_init", c.onboard_solver.lambda_init);
  op.number("relative_tolerance", c.onboard_solver.relative_tolerance);
  op.boolean("huber", c.onboard_solver.huber);
  op.number("huber_delta", c.onboard_solver.huber_delta);
  op.number("odometry_sigma_translation", c.odometry_sigma_translation);
  op.number("odometry_sigma_rotation", c.odometry_sigma_rotation);
  c.server.solver.lambda_init = c.onboard_solver.lambda_init;
  c.server.solver.relative_tolerance = c.onboard_solver.relative_tolerance;
  c.server.solver.huber = c.onboard_solver.huber;
  c.server.solver.huber_delta = c.onboard_solver.huber_delta;

  if (robot_count < 1) throw ConfigError("scenario.robots must be at least 1");
  for (int id = 0; id < robot_count; ++id) {
    if (!doc.has_section("robot." + std::to_string(id))) {
      throw ConfigError("missing section [robot." + std::to_string(id) + "]");
    }
    c.robots.push_back(read_robot(doc, id, base_dir));
  }
  for (const std::string& name : doc.section_names()) {
    static const std::set<std::string> known{"scenario", "spectral", "consistency", "server", "optimizer"};
    if (known.contains(name)) continue;
    bool robot = false;
    for (int id = 0; id < robot_count; ++id) robot = robot || name == "robot." + std::to_string(id);
    if (!robot) throw ConfigError("unknown section [" + name + "]");
  }
  doc.reject_unused();

  c.resolve();
  c.validate();
  return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse_scenario_config(in, path.parent_path());
}

nlohmann::ordered_json to_json(const ScenarioConfig& c) {
  nlohmann::ordered_json j;
  j["scenario"] = {{"seed", c.seed.value_or(0)},
                   {"duration", c.duration},
                   {"odometry_tick", kOdometryTick},
                   {"node_period", c.node_period},
                   {"submap_period", c.submap_period},
                   {"server_period", c.server_period},
                   {"comparison_period", c.comparison_period},
                   {"ate_align", c.ate_align},
                   {"robots", c.robots.size()}};
  const ConsistencyConfig& k = c.consistency;
  j["spectral"] = {{"radius", k.radius},
                   {"sigma", k.sigma},
                   {"scales", k.num_scales},
                   {"metric", to_string(k.metric.kind)},
                   {"translation_weight", k.metric.weights.translation()},
                   {"rotation_weight", k.metric.weights.rotation()}};
  j["consistency"] = {{"top_k", k.selection.top_k},
                      {"adjacent_bands", k.selection.partition.adjacent_bands},
                      {"n_hop_bands", k.selection.partition.n_hop_bands},
                      {"n_hop", k.selection.n_hop},
                      {"accumulate_scales", k.selection.accumulate_scales},
                      {"fill_from_ledger", k.selection.fill_from_ledger},
                      {"sync_tolerance", k.sync_tolerance},
                      {"ledger_translation_tolerance", k.ledger_translation_tolerance},
                      {"ledger_rotation_tolerance", k.ledger_rotation_tolerance},
                      {"refresh_ledger", k.refresh_ledger},
                      {"correction_information_scale", k.correction_information_scale},
                      {"min_synced_nodes", k.min_synced_nodes}};
  const ServerConfig& s = c.server;
  j["server"] = {{"loop_radius", s.loop_radius},
                 {"loop_dwell", s.loop_dwell},
                 {"loop_noise_translation", s.loop_noise(0)},
                 {"loop_noise_rotation", s.loop_noise(3)},
                 {"loop_sigma_translation", c.loop_sigma_translation},
                 {"loop_sigma_rotation", c.loop_sigma_rotation},
                 {"keyframe_translation", s.keyframe_translation},
                 {"keyframe_rotation", s.keyframe_rotation},
                 {"reduction_threshold", s.reduction_threshold},
                 {"reduction_fraction", s.reduction_fraction},
                 {"max_iterations", s.solver.max_iterations}};
  j["optimizer"] = {{"max_iterations", c.onboard_solver.max_iterations},
                    {"lambda_init", c.onboard_solver.lambda_init},
                    {"relative_tolerance", c.onboard_solver.relative_tolerance},
                    {"huber", c.onboard_solver.huber},
                    {"huber_delta", c.onboard_solver.huber_delta},
                    {"odometry_sigma_translation", c.odometry_sigma_translation},
                    {"odometry_sigma_rotation", c.odometry_sigma_rotation}};
  auto robots = nlohmann::ordered_json::array();
  for (const RobotConfig& r : c.robots) {
    nlohmann::ordered_json rj;
    rj["id"] = r.id;
    rj["path"] = to_string(r.path.kind);
    rj["speed"] = r.path.speed;
    rj["turn_rate"] = r.path.turn_rate;
    rj["start"] = vec_json(r.path.start);
    rj["start_yaw"] = r.path.start_yaw;
    switch (r.path.kind) {
      case PathKind::circle:
        rj["radius"] = r.path.radius;
        break;
      case PathKind::corridor:
        rj["length"] = r.path.length;
        break;
      case PathKind::lawnmower:
        rj["length"] = r.path.length;
        rj["width"] = r.path.width;
        rj["spacing"] = r.path.spacing;
        break;
      case PathKind::polyline: {
        auto w = nlohmann::ordered_json::array();
        for (const auto& p : r.path.waypoints) w.push_back({p.x(), p.y()});
        rj["waypoints"] = w;
        break;
      }
      case PathKind::file:
        rj["file"] = r.path.file.generic_string();
        break;
    }
    rj["noise_translation"] = r.noise_translation;
    rj["noise_rotation"] = r.noise_rotation;
    if (r.drift) {
      rj["drift"] = {{"start", r.drift->start}, {"end", r.drift->end}, {"rate", vec_json(r.drift->rate.vector())}};
    }
    if (r.degeneracy) {
      rj["degeneracy"] = {{"start", r.degeneracy->start},
                          {"end", r.degeneracy->end},
                          {"axis", vec_json(r.degeneracy->axis)},
                          {"beta", r.degeneracy->beta}};
    }
    robots.push_back(rj);
  }
  j["robots"] = robots;
  return j;
}

}  // namespace graphwave

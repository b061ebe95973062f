#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "graphwave/consistency.hpp"
#include "graphwave/errors.hpp"
#include "graphwave/graph_io.hpp"
#include "graphwave/kron.hpp"
#include "graphwave/meyer.hpp"
#include "graphwave/report.hpp"
#include "graphwave/scenario.hpp"
#include "graphwave/scenario_config.hpp"
#include "graphwave/spectral.hpp"

namespace fs = std::filesystem;
using namespace graphwave;

namespace {

struct GraphOptions {
  double radius = 7.0;
  double sigma = sigma_for_weight(7.0, 0.1);
};

void add_graph_options(CLI::App* cmd, GraphOptions& g) {
  cmd->add_option("--radius", g.radius, "radius search in meters")->capture_default_str();
  cmd->add_option("--sigma", g.sigma, "edge weight bandwidth")->capture_default_str();
}

WeightedGraph graph_from_g2o(const fs::path& path, const GraphOptions& g) {
  const PoseGraph pg = load_g2o(path);
  return build_graph(pg.nodes(), g.radius, g.sigma);
}

int run(const fs::path& config_path, const fs::path& out_dir) {
  const ScenarioConfig config = load_scenario_config(config_path);
  const RunReport report = run_scenario(config);
  emit_report(report, out_dir);
  for (const RobotReport& r : report.robots) {
    std::cout << "robot " << r.robot_id << ": onboard " << format_double(r.onboard.rmse) << " m, corrected "
              << format_double(r.corrected.rmse) << " m";
    if (r.server) std::cout << ", server " << format_double(r.server->rmse) << " m";
    std::cout << ", constraints " << r.constraints << '\n';
  }
  std::cout << "report written to " << out_dir.string() << '\n';
  return 0;
}

int eval(const fs::path& est, const fs::path& gt, bool align) {
  const AteReport ate = eval_trajectories(est, gt, align);
  std::cout << "ate_rmse " << format_double(ate.rmse) << "\nrotation_rmse " << format_double(ate.rotation_rmse)
            << "\npairs " << ate.pairs << '\n';
  return 0;
}

int reduce(const fs::path& path, std::size_t keep, const GraphOptions& g, const std::string& prefix) {
  const WeightedGraph graph = graph_from_g2o(path, g);
  const WeightedGraph reduced = kron_reduce(graph, keep);
  Eigen::MatrixXd nodes(static_cast<Eigen::Index>(reduced.size()), 4);
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    const GraphVertex& v = reduced.vertices()[i];
    const auto r = static_cast<Eigen::Index>(i);
    nodes(r, 0) = static_cast<double>(v.node_id);
    nodes.block<1, 3>(r, 1) = v.pose.translation().transpose();
  }
  write_csv(prefix + "_nodes.csv", nodes, {"id", "x", "y", "z"});
  std::vector<std::string> header;
  for (const GraphVertex& v : reduced.vertices()) header.push_back("n" + std::to_string(v.node_id));
  write_csv(prefix + "_laplacian.csv", laplacian(reduced), header);
  std::cout << "kept " << reduced.size() << " of " << graph.size() << " nodes\n";
  return 0;
}

int spectrum(const fs::path& path, int scales, const GraphOptions& g, const std::string& prefix) {
  const PoseGraph pg = load_g2o(path);
  const WeightedGraph graph = build_graph(pg.nodes(), g.radius, g.sigma);
  const LaplacianDecomposition decomp = decompose(laplacian(graph));
  write_csv(prefix + "_eigenvalues.csv", decomp.eigenvalues, {"lambda"});
  const FilterBank bank = make_meyer_bank(decomp.lambda_max(), scales);
  const GraphSignal signal = build_signal(pg.nodes(), pg.nodes().front().pose);
  const WaveletCoefficients w = wavelet_coefficients(decomp, bank, signal.values);
  std::vector<std::string> header{"scaling"};
  for (int j = 1; j <= scales; ++j) header.push_back("band" + std::to_string(j));
  write_csv(prefix + "_wavelets.csv", w.values, header);
  std::cout << graph.size() << " nodes, lambda_max " << format_double(decomp.lambda_max()) << ", "
            << component_count(graph.adjacency()) << " component(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-scale spectral consistency checks for multi-robot pose graphs"};
  app.require_subcommand(1);

  fs::path config_path, out_dir = "out";
  auto* run_cmd = app.add_subcommand("run", "run a simulated scenario and write its report");
  run_cmd->add_option("config", config_path, "scenario config file")->required();
  run_cmd->add_option("--out", out_dir, "output directory")->capture_default_str();

  fs::path est, gt;
  bool align = false;
  auto* eval_cmd = app.add_subcommand("eval", "ATE RMSE of a TUM trajectory against ground truth");
  eval_cmd->add_option("est", est, "estimated trajectory (TUM)")->required();
  eval_cmd->add_option("gt", gt, "ground-truth trajectory (TUM)")->required();
  eval_cmd->add_flag("--align", align, "rigidly align before measuring");

  fs::path graph_path;
  std::size_t keep = 0;
  GraphOptions graph_opts;
  std::string reduce_prefix = "reduced";
  auto* reduce_cmd = app.add_subcommand("reduce", "Kron-reduce the radius graph of a g2o file");
  reduce_cmd->add_option("graph", graph_path, "pose graph (g2o)")->required();
  reduce_cmd->add_option("--keep", keep, "number of nodes to keep")->required();
  reduce_cmd->add_option("--prefix", reduce_prefix, "output file prefix")->capture_default_str();
  add_graph_options(reduce_cmd, graph_opts);

  int scales = kMaxWaveletScales;
  std::string spectrum_prefix = "spectrum";
  auto* spectrum_cmd = app.add_subcommand("spectrum", "dump Laplacian eigenvalues and wavelet coefficients");
  spectrum_cmd->add_option("graph", graph_path, "pose graph (g2o)")->required();
  spectrum_cmd->add_option("--scales", scales, "number of wavelet bands")->capture_default_str();
  spectrum_cmd->add_option("--prefix", spectrum_prefix, "output file prefix")->capture_default_str();
  add_graph_options(spectrum_cmd, graph_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*run_cmd) return run(config_path, out_dir);
    if (*eval_cmd) return eval(est, gt, align);
    if (*reduce_cmd) return reduce(graph_path, keep, graph_opts, reduce_prefix);
    if (*spectrum_cmd) return spectrum(graph_path, scales, graph_opts, spectrum_prefix);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

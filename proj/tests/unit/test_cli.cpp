#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <sys/wait.h>

#include "graphwave/graph_io.hpp"

using namespace graphwave;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Invocation cli(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = "cd '" + dir.string() + "' && '" GRAPHWAVE_CLI "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Invocation r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::size_t lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

fs::path workdir() {
  const fs::path dir = fs::temp_directory_path() / "graphwave_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_sample_graph(const fs::path& path) {
  std::vector<PoseNode> nodes;
  std::vector<PoseEdge> edges;
  for (int i = 0; i < 30; ++i) {
    nodes.push_back({i, 0, 0, Pose::from_yaw(0.1 * i, {std::cos(0.2 * i) * 5, std::sin(0.2 * i) * 5, 0}),
                     double(i)});
    if (i > 0) {
      edges.push_back({i - 1, i, EdgeKind::odometry, nodes[i - 1].pose.inverse() * nodes[i].pose,
                       default_odometry_information()});
    }
  }
  save_g2o(PoseGraph(nodes, edges), path);
}

}  // namespace

TEST_CASE("cli eval") {
  const fs::path dir = workdir();
  std::ofstream(dir / "a.tum") << "0 0 0 0 0 0 0 1\n1 1 0 0 0 0 0 1\n2 2 0 0 0 0 0 1\n";
  std::ofstream(dir / "b.tum") << "0 0 1 0 0 0 0 1\n1 1 1 0 0 0 0 1\n2 2 1 0 0 0 0 1\n";
  const Invocation same = cli("eval a.tum a.tum", dir);
  CHECK(same.code == 0);
  CHECK(same.out.find("ate_rmse 0") != std::string::npos);

  const Invocation shifted = cli("eval b.tum a.tum", dir);
  CHECK(shifted.code == 0);
  CHECK(shifted.out.find("ate_rmse 1") != std::string::npos);
  const Invocation aligned = cli("eval b.tum a.tum --align", dir);
  CHECK(aligned.code == 0);

  const Invocation missing = cli("eval nope.tum a.tum", dir);
  CHECK(missing.code != 0);
  CHECK(lines(missing.err) == 1);
  CHECK(missing.err.rfind("error: ", 0) == 0);

  std::ofstream(dir / "bad.tum") << "0 0 0\n";
  const Invocation bad = cli("eval bad.tum a.tum", dir);
  CHECK(bad.code != 0);
  CHECK(lines(bad.err) == 1);
}

TEST_CASE("cli usage errors") {
  const fs::path dir = workdir();
  const Invocation none = cli("frobnicate", dir);
  CHECK(none.code != 0);
  CHECK(lines(none.err) == 1);
  const Invocation no_args = cli("reduce", dir);
  CHECK(no_args.code != 0);
  CHECK(lines(no_args.err) == 1);
}

TEST_CASE("cli reduce and spectrum") {
  const fs::path dir = workdir();
  write_sample_graph(dir / "g.g2o");

  const Invocation reduced = cli("reduce g.g2o --keep 12", dir);
  CHECK(reduced.code == 0);
  CHECK(fs::exists(dir / "reduced_nodes.csv"));
  CHECK(fs::exists(dir / "reduced_laplacian.csv"));
  CHECK(lines(slurp(dir / "reduced_nodes.csv")) == 13);
  CHECK(lines(slurp(dir / "reduced_laplacian.csv")) == 13);

  const Invocation too_many = cli("reduce g.g2o --keep 99", dir);
  CHECK(too_many.code != 0);
  CHECK(lines(too_many.err) == 1);

  const Invocation spec = cli("spectrum g.g2o --scales 4", dir);
  CHECK(spec.code == 0);
  CHECK(lines(slurp(dir / "spectrum_eigenvalues.csv")) == 31);
  const std::string wavelets = slurp(dir / "spectrum_wavelets.csv");
  CHECK(lines(wavelets) == 31);
  CHECK(wavelets.substr(0, wavelets.find('\n')).find("band4") != std::string::npos);

  std::ofstream(dir / "broken.g2o") << "VERTEX_SE3:QUAT 0 0 0\n";
  const Invocation broken = cli("spectrum broken.g2o", dir);
  CHECK(broken.code != 0);
  CHECK(lines(broken.err) == 1);
  CHECK(broken.err.find("line 1") != std::string::npos);
}

TEST_CASE("cli run") {
  const fs::path dir = workdir();
  std::ofstream(dir / "s.toml") << "[scenario]\nseed = 1\nduration = 60\nrobots = 1\n"
                                   "[robot.0]\npath = \"circle\"\nradius = 5\n";
  const Invocation r = cli("run s.toml --out out", dir);
  CHECK(r.code == 0);
  CHECK(r.out.find("robot 0: onboard") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "report.json"));

  std::ofstream(dir / "noseed.toml") << "[scenario]\nrobots = 1\n[robot.0]\npath = \"circle\"\n";
  const Invocation noseed = cli("run noseed.toml --out out2", dir);
  CHECK(noseed.code != 0);
  CHECK(lines(noseed.err) == 1);
  CHECK(noseed.err.find("seed") != std::string::npos);
}

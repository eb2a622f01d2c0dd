#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sgf/commands.hpp"
#include "sgf/snapshot.hpp"
#include "support/helpers.hpp"

using namespace sgf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("sgf_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing: defaults, errors, schema rules") {
  const RunConfig minimal = parse_config("domain.m = 2\npotential.family = smoothed\n");
  CHECK(minimal.n_per_axis == 32);
  CHECK(minimal.delta == 0.5);
  CHECK(minimal.stride == 10);
  CHECK(minimal.integrator == Integrator::SpectralImex);
  CHECK(minimal.resolved_rho() == doctest::Approx(minimal.domain().cutoff_radius() / 2));
  CHECK(minimal.winding == std::vector<int>{1, 0});

  CHECK_THROWS_WITH_AS(parse_config("potential.b = -1\n"),
                       doctest::Contains("potential.b"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("potential.family = singular\npotential.L = 2\n"),
                       doctest::Contains("potential.L"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("no.such.key = 1\n"), doctest::Contains("no.such.key"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("domain.m = 1\n"), doctest::Contains("domain.m"),
                       ConfigError);
  CHECK_THROWS_AS(parse_config("domain.m\n"), ConfigError);

  // resolved text round-trips through the parser
  const RunConfig again = parse_config(minimal.resolved_text());
  CHECK(again.n_per_axis == minimal.n_per_axis);
  CHECK(again.t_end == minimal.t_end);
}

TEST_CASE("snapshot round trip is bit-identical") {
  TempDir tmp;
  const LatticeDomain dom(3, 8, 1.7);
  std::mt19937_64 rng(55);
  SymmetricMatrixField f(dom, 3, 0.375);
  for (std::int64_t s = 0; s < dom.site_count(); ++s)
    f.set_matrix(s, test::random_symmetric(rng, 3));

  const std::string path = (tmp.path / "a.sgf").string();
  write_snapshot(f, path);
  const SymmetricMatrixField g = read_snapshot(path);
  CHECK(g.domain() == dom);
  CHECK(g.time() == f.time());
  CHECK(g.raw() == f.raw());  // bit-identical payload

  const std::string path2 = (tmp.path / "b.sgf").string();
  write_snapshot(g, path2);
  CHECK(slurp(path) == slurp(path2));  // byte-identical files

  // header length is pinned by the format
  CHECK(slurp(path).size() == kSnapshotHeaderBytes + f.raw().size() * 8);
}

TEST_CASE("snapshot format errors carry byte offsets") {
  TempDir tmp;
  const LatticeDomain dom(2, 4, 1.0);
  SymmetricMatrixField f(dom, 2, 0.0);
  const std::string path = (tmp.path / "c.sgf").string();
  write_snapshot(f, path);

  // truncation
  {
    std::string bytes = slurp(path);
    bytes.resize(bytes.size() - 5);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << bytes;
  }
  CHECK_THROWS_AS(read_snapshot(path), FormatError);

  // bad magic
  write_snapshot(f, path);
  {
    std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
    io.seekp(0);
    io.put('X');
  }
  try {
    read_snapshot(path);
    CHECK(false);
  } catch (const FormatError& e) {
    CHECK(e.offset == 0);
  }

  // non-finite payload is rejected with the offending offset
  write_snapshot(f, path);
  {
    std::fstream io(path, std::ios::binary | std::ios::in | std::ios::out);
    io.seekp(kSnapshotHeaderBytes + 8);
    const std::uint64_t nan_bits = 0x7ff8000000000000ull;
    for (int i = 0; i < 8; ++i) io.put(static_cast<char>((nan_bits >> (8 * i)) & 0xff));
  }
  try {
    read_snapshot(path);
    CHECK(false);
  } catch (const FormatError& e) {
    CHECK(e.offset == kSnapshotHeaderBytes + 8);
  }
}

TEST_CASE("cmd_run: stationary scenario keeps E constant") {
  TempDir tmp;
  RunConfig cfg = parse_config(
      "domain.m = 2\n"
      "domain.n_per_axis = 8\n"
      "matrix.scale = 0\n"  // f == 0 is stationary for the smoothed family
      "potential.family = smoothed\n"
      "potential.b = 0.5\n"
      "flow.dt = 0.001\n"
      "flow.t_end = 0.05\n"
      "flow.stride = 10\n");
  CHECK(cmd_run(cfg, tmp.str()) == ExitStatus::Ok);

  std::ifstream series(tmp.path / "series.csv");
  std::string header;
  std::getline(series, header);
  CHECK(header == "t,E,kinetic,potential,sup_e,residual,dEdt,dissipation");
  std::string line;
  double first_E = -1.0;
  int rows = 0;
  while (std::getline(series, line)) {
    std::stringstream ss(line);
    std::string tok;
    std::getline(ss, tok, ',');
    std::getline(ss, tok, ',');
    const double E = std::stod(tok);
    if (first_E < 0) first_E = E;
    CHECK(E == doctest::Approx(first_E).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 50);
  CHECK(fs::exists(tmp.path / "config.resolved.txt"));
}

TEST_CASE("cmd_run: snapshot count follows the stride, including t = 0") {
  TempDir tmp;
  RunConfig cfg = parse_config(
      "domain.m = 2\n"
      "domain.n_per_axis = 8\n"
      "potential.family = smoothed\n"
      "potential.b = 0.5\n"
      "flow.dt = 0.001\n"
      "flow.t_end = 0.1\n"  // 100 steps
      "flow.stride = 10\n");
  CHECK(cmd_run(cfg, tmp.str()) == ExitStatus::Ok);
  int count = 0;
  for (const auto& entry : fs::directory_iterator(tmp.path))
    if (entry.path().extension() == ".sgf") ++count;
  CHECK(count == 11);
}

TEST_CASE("cmd_run: singular blow-up exits with the divergence status") {
  TempDir tmp;
  RunConfig cfg = parse_config(
      "domain.m = 2\n"
      "domain.n_per_axis = 8\n"
      "matrix.winding = 2 1\n"
      "matrix.scale = 0.1\n"
      "potential.family = singular\n"
      "flow.integrator = explicit_euler\n"
      "flow.dt = 0.05\n"
      "flow.t_end = 60\n");
  CHECK(cmd_run(cfg, tmp.str()) == ExitStatus::Diverged);
  CHECK(fs::exists(tmp.path / "series.csv"));       // partial artifacts retained
  CHECK(fs::exists(tmp.path / "divergence.txt"));
}

TEST_CASE("cmd_analyze produces deterministic reports") {
  TempDir run_dir, out1, out2;
  RunConfig cfg = parse_config(
      "domain.m = 2\n"
      "domain.n_per_axis = 24\n"
      "domain.period = 2\n"
      "matrix.perturbation = 0.2\n"
      "potential.family = smoothed\n"
      "potential.b = 0.5\n"
      "flow.t_end = 1.0\n"
      "flow.stride = 10\n");
  REQUIRE(cmd_run(cfg, run_dir.str()) == ExitStatus::Ok);
  REQUIRE(cmd_analyze(cfg, run_dir.str(), out1.str()) == ExitStatus::Ok);
  REQUIRE(cmd_analyze(cfg, run_dir.str(), out2.str()) == ExitStatus::Ok);

  for (const char* name : {"phi_profile.csv", "psi_checks.csv", "moser_checks.csv",
                           "epsreg_elliptic.csv", "epsreg_parabolic.csv", "summary.json"}) {
    CHECK(fs::exists(out1.path / name));
    CHECK(slurp(out1.path / name) == slurp(out2.path / name));  // byte-identical
  }
  const std::string summary = slurp(out1.path / "summary.json");
  CHECK(summary.find("\"p0\"") != std::string::npos);
  CHECK(summary.find("\"constants\"") != std::string::npos);
}

TEST_CASE("cmd_sweep writes both tables") {
  TempDir tmp;
  RunConfig cfg = parse_config(
      "domain.m = 2\n"
      "domain.n_per_axis = 8\n"
      "domain.period = 2\n"
      "potential.family = smoothed\n"
      "potential.b = 1\n"
      "flow.t_end = 0.5\n"
      "analysis.b_sweep = 1 0.5\n");
  CHECK(cmd_sweep(cfg, tmp.str()) == ExitStatus::Ok);
  const std::string bad = slurp(tmp.path / "badset_sweep.csv");
  CHECK(bad.rfind("b,r,J,H,E0,ratio,stationary,bad_sites", 0) == 0);
  CHECK(fs::exists(tmp.path / "sup_e_sweep.csv"));
  CHECK(fs::exists(tmp.path / "sup_e_fit.txt"));
}

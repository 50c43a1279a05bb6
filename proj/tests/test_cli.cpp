#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "commands.hpp"
#include "experiment_config.hpp"
#include "qcs/csv.hpp"

namespace fs = std::filesystem;
using namespace qcs;
using namespace qcs::app;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("qcs_test_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& contents) const {
    std::ofstream(path / name) << contents;
    return (path / name).string();
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const char* kSmall = R"({
  "grid": {"spacing": 0.1, "window": 2.0},
  "object": {"peaks": 2, "spacing": 0.5},
  "noise": {"snr_db": 40},
  "seed": 4
})";

std::string config_error(const std::string& text) {
  try {
    ExperimentConfig::from_json(json::parse(text));
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("configuration defaults") {
  const auto cfg = ExperimentConfig::from_json(json::object());
  CHECK(cfg.scenario.grid().size() == 121);
  CHECK(cfg.scenario.object.peaks == 4);
  CHECK(cfg.scenario.object.spacing == 0.5);
  CHECK(cfg.scenario.kernel.fwhm == 0.55);
  CHECK(cfg.positions().size() == 121);
  CHECK(cfg.zeta.oracle);
  CHECK(cfg.epsilon.oracle);
}

TEST_CASE("configuration round trip") {
  const auto cfg = ExperimentConfig::from_json(json::parse(R"({
    "optics": {"kernel": {"type": "coherent"}},
    "object": {"spikes": [{"position": 0.2, "amplitude": 3, "phase": 1.0}]},
    "measurements": {"count": 25, "window": 4},
    "noise": {"snr_db": null},
    "solver": {"zeta": null, "epsilon": 0.01, "threshold": 0.2},
    "sweep": {"values": [1, 2], "trials": 3}
  })"));
  const json resolved = cfg.to_json();
  CHECK(ExperimentConfig::from_json(resolved).to_json() == resolved);
  CHECK(cfg.positions().size() == 25);
  CHECK(cfg.positions().front() == doctest::Approx(-2.0));
  CHECK_FALSE(cfg.scenario.snr_db.has_value());
  CHECK_FALSE(cfg.zeta.oracle);
  CHECK_FALSE(cfg.zeta.value.has_value());
  const auto obj = cfg.object();
  CHECK(std::abs(obj.amplitudes(obj.grid.nearest(0.2)) - std::polar(3.0, 1.0)) < 1e-15);
}

TEST_CASE("configuration errors name the key") {
  CHECK(config_error(R"({"grid": {"spacng": 0.1}})").starts_with("grid.spacng: unknown key"));
  CHECK(config_error(R"({"colour": 1})").starts_with("colour: unknown key"));
  CHECK(config_error(R"({"optics": {"kernel": {"fwhm": -0.5}}})").starts_with("optics.kernel.fwhm"));
  CHECK(config_error(R"({"grid": {"spacing": 0}})").starts_with("grid.spacing"));
  CHECK(config_error(R"({"grid": {"spacing": -0.1}})").starts_with("grid.spacing"));
  CHECK(config_error(R"({"solver": {"threshold": 1.0}})").starts_with("solver.threshold"));
  CHECK(config_error(R"({"solver": {"threshold": 0}})").starts_with("solver.threshold"));
  CHECK(config_error(R"({"solver": {"zeta": "auto"}})").starts_with("solver.zeta"));
  CHECK(config_error(R"({"solver": {"delta": "big"}})").starts_with("solver.delta: must be a number"));
  CHECK(config_error(R"({"object": {"spikes": [{"position": 0, "amp": 1}]}})")
            .starts_with("object.spikes[0].amp: unknown key"));
  CHECK(config_error(R"({"sweep": {"trials": 0}})").starts_with("sweep.trials"));
  CHECK(config_error(R"({"object": {"peaks": 20, "spacing": 0.5}})").starts_with("object.spacing"));
  CHECK(config_error(R"([1, 2])").starts_with("configuration: must be an object"));
}

TEST_CASE("simulate writes deterministic files") {
  TempDir dir("simulate");
  const auto config = dir.file("small.json", kSmall);
  const Run a = cli({"simulate", "--config", config, "--out", dir / "a", "--quiet"});
  const Run b = cli({"simulate", "--config", config, "--out", dir / "b", "--quiet"});
  REQUIRE(a.code == kSuccess);
  REQUIRE(b.code == kSuccess);
  CHECK(a.out.empty());
  for (const char* f : {"measurements.csv", "truth.csv", "simulate.json"})
    CHECK(slurp(dir.path / "a" / f) == slurp(dir.path / "b" / f));
  const auto y = csv::read(dir.path / "a" / "measurements.csv");
  CHECK(y.header == std::vector<std::string>{"u", "y"});
  CHECK(y.rows.size() == 21);
  const auto meta = json::parse(slurp(dir.path / "a" / "simulate.json"));
  CHECK(meta["config"]["seed"] == 4);

  const Run c = cli({"simulate", "--config", config, "--out", dir / "c", "--seed", "5", "--quiet"});
  REQUIRE(c.code == kSuccess);
  CHECK(slurp(dir.path / "a" / "truth.csv") != slurp(dir.path / "c" / "truth.csv"));
}

TEST_CASE("simulate the default configuration") {
  TempDir dir("default");
  REQUIRE(cli({"simulate", "--out", dir / "o", "--quiet"}).code == kSuccess);
  CHECK(csv::read(dir.path / "o" / "measurements.csv").rows.size() == 121);
}

TEST_CASE("empty object gives zero intensity") {
  TempDir dir("empty");
  const auto config = dir.file("empty.json", R"({"object": {"spikes": []}, "noise": {"snr_db": null}})");
  REQUIRE(cli({"simulate", "--config", config, "--out", dir / "o", "--quiet"}).code == kSuccess);
  const auto y = csv::read(dir.path / "o" / "measurements.csv");
  for (const auto& row : y.rows) CHECK(row[1] == 0.0);
}

TEST_CASE("reconstruct consumes simulate output") {
  TempDir dir("roundtrip");
  const auto config = dir.file("small.json", kSmall);
  REQUIRE(cli({"simulate", "--config", config, "--out", dir / "sim", "--quiet"}).code == kSuccess);

  const Run direct = cli({"reconstruct", "--config", config, "--out", dir / "direct", "--quiet"});
  const Run files = cli({"reconstruct", "--config", config, "--out", dir / "files", "--quiet", "--measurements",
                         dir / "sim/measurements.csv", "--truth", dir / "sim/truth.csv"});
  CHECK((direct.code == kSuccess || direct.code == kStalled));
  CHECK(files.code == direct.code);
  CHECK(slurp(dir.path / "direct" / "reconstruction.csv") == slurp(dir.path / "files" / "reconstruction.csv"));
  CHECK(slurp(dir.path / "direct" / "diagnostics.json") == slurp(dir.path / "files" / "diagnostics.json"));

  const auto diag = json::parse(slurp(dir.path / "direct" / "diagnostics.json"));
  CHECK(diag["variant"] == "sparse");
  CHECK(diag.contains("rank_ratio"));
  CHECK(diag.contains("error"));
  CHECK(fs::exists(dir.path / "direct" / "reconstruction.svg"));
  const auto rec = csv::read(dir.path / "direct" / "reconstruction.csv");
  CHECK(rec.header == std::vector<std::string>{"eta", "re_a", "im_a"});
  CHECK(rec.rows.size() == 21);

  const Run base = cli({"reconstruct", "--config", config, "--out", dir / "base", "--quiet", "--no-sparsity"});
  CHECK(base.code != kConfigError);
  const auto bdiag = json::parse(slurp(dir.path / "base" / "diagnostics.json"));
  CHECK(bdiag["variant"] == "baseline");
  CHECK(bdiag["zeta"] == "inf");
}

TEST_CASE("reconstruct input errors") {
  TempDir dir("errors");
  const auto blind = dir.file("blind.json", R"({"solver": {"zeta": null, "epsilon": 0.01}})");
  const auto bad = dir.file("bad.csv", "u,y\n0,1\n0.1,2\n0.2,x\n");
  const Run r = cli({"reconstruct", "--config", blind, "--measurements", bad, "--out", dir / "o"});
  CHECK(r.code == kConfigError);
  CHECK(r.err.find("bad.csv:4") != std::string::npos);

  const auto oracle = dir.file("oracle.json", "{}");
  const auto good = dir.file("good.csv", "u,y\n0,1\n0.1,2\n");
  const Run o = cli({"reconstruct", "--config", oracle, "--measurements", good, "--out", dir / "o"});
  CHECK(o.code == kConfigError);
  CHECK(o.err.find("solver.zeta") != std::string::npos);

  CHECK(cli({"reconstruct", "--bogus"}).code == kConfigError);
  CHECK(cli({}).code == kConfigError);
  CHECK(cli({"--help"}).code == kSuccess);
}

TEST_CASE("infeasible data gets its own exit code") {
  TempDir dir("infeasible");
  const auto config = dir.file("c.json", R"({
    "grid": {"spacing": 0.1, "window": 2.0},
    "solver": {"zeta": 1e-3, "epsilon": 0.0}
  })");
  const auto y = dir.file("y.csv", "u,y\n-0.5,1\n0,2\n0.5,1\n");
  const Run r = cli({"reconstruct", "--config", config, "--measurements", y, "--out", dir / "o", "--quiet"});
  CHECK(r.code == kInfeasible);
}

TEST_CASE("sweep command") {
  TempDir dir("sweep");
  const auto config = dir.file("small.json", R"({
    "grid": {"spacing": 0.1, "window": 2.0},
    "object": {"peaks": 2, "spacing": 0.5},
    "sweep": {"values": [9, 13, 17, 21, 25]}
  })");
  const Run s = cli({"sweep", "samples", "--config", config, "--trials", "1", "--out", dir / "o", "--quiet"});
  REQUIRE(s.code == kSuccess);
  const std::string text = slurp(dir.path / "o" / "sweep_samples.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
  CHECK(fs::exists(dir.path / "o" / "sweep_samples.svg"));
  CHECK(slurp(dir.path / "o" / "sweep_samples.svg").find("number of samples") != std::string::npos);

  const auto noise_cfg = dir.file("noise.json", R"({
    "grid": {"spacing": 0.1, "window": 2.0},
    "object": {"peaks": 2, "spacing": 0.5},
    "sweep": {"values": [30]}
  })");
  REQUIRE(cli({"sweep", "noise", "--config", noise_cfg, "--trials", "1", "--out", dir / "n", "--quiet"}).code ==
          kSuccess);
  const std::string noise = slurp(dir.path / "n" / "sweep_noise.csv");
  CHECK(noise.find(",sparse,") != std::string::npos);
  CHECK(noise.find(",baseline,") != std::string::npos);

  CHECK(cli({"sweep", "colours", "--out", dir / "x"}).code == kConfigError);
  CHECK(cli({"sweep", "samples", "--trials", "0", "--out", dir / "x"}).code == kConfigError);
}

#include <unistd.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "rover/config.hpp"
#include "rover/outputs.hpp"

using namespace rover;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rover_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("minimal document resolves to the per-experiment defaults") {
  const ExperimentConfig c = parse_config(R"({"experiment": {"name": "ascend"}})", "ascend");
  CHECK(c.experiment == "ascend");
  CHECK(c.seed == 0);
  CHECK(c.sigma == 1e-3);
  CHECK(!c.budget);
  CHECK(c.estimator.d == 4.0);
  CHECK(c.estimator.delta == 2.0);
  CHECK(c.estimator.n_samples == 500);
  CHECK(c.rover.j_scale == c.system.j_max);
  CHECK(c.out_dir == "rover_out");
  CHECK(c.dim() == 8);
}

TEST_CASE("experiment-specific defaults") {
  const ExperimentConfig probe = default_config("hessian-probe");
  CHECK(probe.estimator.delta == 8.0);
  CHECK(probe.estimator.n_samples == 500);

  const ExperimentConfig top = default_config("drive-top");
  CHECK(top.estimator.delta == 7.0);
  CHECK(top.estimator.n_samples == 100);
  CHECK(top.rover.step_len == 0.0);  // auto
  CHECK(top.n_iter == 10);

  const ExperimentConfig energy = default_config("levelset-energy");
  CHECK(energy.rover.step_len == 1.0);
  CHECK(energy.n_iter == 30);

  const ExperimentConfig dist = default_config("levelset-distance");
  CHECK(dist.rover.step_len == 3.0);
  CHECK(dist.rover.level_tolerance == 0.014);
  CHECK(dist.target_rel_distance == 2.5);

  CHECK_THROWS_AS(default_config("warp-drive"), config_error);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK_THROWS_AS(parse_config(R"({"bogus": 1})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"system": {"bogus": 1}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"pulse": {"dt": 1}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"noise": {"snr": 10}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"estimator": {"order": 2}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"rover": {"j_scale": 1.0}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": {"name": "ascend", "h_free": [1]}})", "ascend"),
                  config_error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": {"name": "drive-top"}})", "ascend"),
                  config_error);
  CHECK_THROWS_AS(parse_config("{not json", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"([1, 2, 3])", "ascend"), config_error);
}

TEST_CASE("typed values and domain checks") {
  CHECK_THROWS_AS(parse_config(R"({"noise": {"sigma": "loud"}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"noise": {"sigma": -0.1}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"noise": {"budget": 0}})", "ascend"), config_error);
  CHECK_THROWS_AS(parse_config(R"({"experiment": {"name": "ascend", "seed": -4}})", "ascend"),
                  config_error);
  CHECK_THROWS_AS(
      parse_config(R"({"experiment": {"name": "ascend", "x_init": [1, 2, 3]}})", "ascend"),
      config_error);
  CHECK_THROWS_AS(
      parse_config(R"({"experiment": {"name": "scan-eigenvectors", "n_points": 12}})",
                   "scan-eigenvectors"),
      config_error);
  CHECK_THROWS_AS(
      parse_config(R"({"experiment": {"name": "scan-eigenvectors", "at": "elsewhere"}})",
                   "scan-eigenvectors"),
      config_error);
  CHECK_THROWS_AS(
      parse_config(R"({"experiment": {"name": "levelset-energy", "j0_target": 1.5}})",
                   "levelset-energy"),
      config_error);

  // budget null means unlimited; a positive integer is kept.
  CHECK(!parse_config(R"({"noise": {"budget": null}})", "ascend").budget);
  CHECK(*parse_config(R"({"noise": {"budget": 500}})", "ascend").budget == 500);
}

TEST_CASE("seed precedence: document beats the environment fallback") {
  CHECK(parse_config(R"({"experiment": {"name": "ascend"}})", "ascend", 77).seed == 77);
  CHECK(parse_config(R"({"experiment": {"name": "ascend", "seed": 5}})", "ascend", 77).seed == 5);
  CHECK(parse_config(R"({})", "ascend").seed == 0);
}

TEST_CASE("probe location x-init requires an explicit start") {
  CHECK_THROWS_AS(
      parse_config(R"({"experiment": {"name": "hessian-probe", "at": "x-init"}})",
                   "hessian-probe"),
      config_error);
  const ExperimentConfig c = parse_config(
      R"({"experiment": {"name": "hessian-probe", "at": "x-init",
          "x_init": [0, 0, 0, 0, 37, 37, 37, 37]}})",
      "hessian-probe");
  CHECK(c.probe_at == "x-init");
  REQUIRE(c.x_init.has_value());
  CHECK(c.x_init->size() == 8u);
}

TEST_CASE("echo round-trips through the parser unchanged") {
  for (const std::string name :
       {"ascend", "descend", "hessian-probe", "scan-eigenvectors", "drive-top",
        "levelset-energy", "levelset-distance", "calibrate"}) {
    const ExperimentConfig c = parse_config(R"({"experiment": {"name": ")" + name + R"("}})",
                                            name);
    const nlohmann::json echo = echo_config(c);
    const ExperimentConfig again = parse_config(echo.dump(), name);
    CHECK(echo_config(again) == echo);
  }
}

TEST_CASE("echo resolves the all-ones default free direction") {
  const ExperimentConfig c =
      parse_config(R"({"experiment": {"name": "drive-top"}})", "drive-top");
  const nlohmann::json echo = echo_config(c);
  REQUIRE(echo["experiment"].contains("h_free"));
  CHECK(echo["experiment"]["h_free"] == nlohmann::json::array({1, 1, 1, 1, 1, 1, 1, 1}));
  CHECK(echo["noise"]["budget"].is_null());
  CHECK(echo["rover"].contains("step_len"));
  CHECK(!echo["rover"].contains("j_scale"));
}

TEST_CASE("pulse geometry flows into the experiment dimension") {
  const ExperimentConfig c = parse_config(
      R"({"pulse": {"n_intervals": 6, "total_time": 4e-4},
          "experiment": {"name": "ascend", "x_init": [1,2,3,4,5,6,7,8,9,10,11,12]}})",
      "ascend");
  CHECK(c.dim() == 12);
  CHECK(c.total_time == 4e-4);
  CHECK_THROWS_AS(parse_config(
                      R"({"pulse": {"n_intervals": 6},
          "experiment": {"name": "ascend", "x_init": [1, 2]}})",
                      "ascend"),
                  config_error);
}

TEST_CASE("csv header is pinned") {
  CHECK(csv_header(8) == "iter,s,J,grad_norm,rel_distance,event,x0,x1,x2,x3,x4,x5,x6,x7");
  CHECK(csv_header(2) == "iter,s,J,grad_norm,rel_distance,event,x0,x1");
}

TEST_CASE("format_double is the shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(37.0) == "37");
  CHECK(format_double(-1.0) == "-1");
  CHECK(format_double(0.0) == "0");
  const double third = 1.0 / 3.0;
  CHECK(std::stod(format_double(third)) == third);
  const double tiny = 4.50584568545e-4;
  CHECK(std::stod(format_double(tiny)) == tiny);
}

TEST_CASE("trajectory writer emits pinned rows with empty optionals") {
  TempDir dir;
  const fs::path file = dir.path / "t.csv";
  {
    TrajectoryWriter w(file.string(), 2);
    TrajectoryRecord rec;
    rec.iter = 0;
    rec.s = 0.0;
    rec.j = 0.5;
    rec.rel_distance = 0.0;
    rec.event = "step";
    rec.x = Eigen::Vector2d(1.5, -2.0);
    w.write(rec);

    rec.iter = 1;
    rec.s = 2.0;
    rec.j = 0.75;
    rec.grad_norm = 0.125;
    rec.rel_distance = 0.5;
    rec.event = "converged";
    rec.x = Eigen::Vector2d(3.0, 0.25);
    w.write(rec);

    TrajectoryRecord bad = rec;
    bad.x = Eigen::VectorXd::Zero(3);
    CHECK_THROWS_AS(w.write(bad), std::invalid_argument);
  }
  CHECK(slurp(file) ==
        "iter,s,J,grad_norm,rel_distance,event,x0,x1\n"
        "0,0,0.5,,0,step,1.5,-2\n"
        "1,2,0.75,0.125,0.5,converged,3,0.25\n");
}

TEST_CASE("json writers leave no temp files and end with a newline") {
  TempDir dir;
  const fs::path file = dir.path / "doc.json";
  write_json_atomic(file.string(), nlohmann::json{{"b", 1}, {"a", 2}});
  const std::string text = slurp(file);
  CHECK(text.back() == '\n');
  CHECK(nlohmann::json::parse(text) == nlohmann::json({{"a", 2}, {"b", 1}}));
  // keys are emitted sorted, so replays are byte-identical
  CHECK(text.find("\"a\"") < text.find("\"b\""));
  int entries = 0;
  for (const auto& e : fs::directory_iterator(dir.path)) {
    (void)e;
    ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("spectrum and estimate serializers carry the full schema") {
  const HessianSpectrum s = eigendecompose(Eigen::MatrixXd::Identity(3, 3));
  const CriticalVerdict v = classify_critical_point(s, 0.0, 1.0);
  const nlohmann::json js = spectrum_to_json(s, v);
  for (const char* key :
       {"eigenvalues", "eigenvectors", "null_tol", "neg_tol", "n_pos", "n_neg", "n_null", "label"})
    CHECK(js.contains(key));
  CHECK(js["eigenvalues"].size() == 3u);
  CHECK(js["eigenvectors"][0].size() == 3u);
  CHECK(js["label"] == "min-like");

  HessianEstimate est;
  est.h = Eigen::MatrixXd::Identity(2, 2);
  est.g = Eigen::Vector2d(1, 2);
  est.j0 = 0.5;
  est.n_samples = 44;
  est.delta = 2.0;
  est.residual_rms = 1e-3;
  est.measurements_used = 45;
  const nlohmann::json je = hessian_estimate_to_json(est);
  for (const char* key :
       {"h", "g", "j0", "n_samples", "delta", "residual_rms", "measurements_used"})
    CHECK(je.contains(key));
  CHECK(je["h"][1][1] == 1.0);
  CHECK(je["g"][1] == 2.0);
}

TEST_CASE("scan csv format") {
  TempDir dir;
  ScanResult scan;
  scan.t = Eigen::Vector3d(-0.5, 0.0, 0.5);
  scan.j = Eigen::Vector3d(0.25, 1.0, 0.25);
  const fs::path file = dir.path / "scan.csv";
  write_scan_csv(file.string(), scan);
  CHECK(slurp(file) == "t,J\n-0.5,0.25\n0,1\n0.5,0.25\n");
}

TEST_CASE("load_config reports missing files as config errors") {
  CHECK_THROWS_AS(load_config("/nonexistent/config.json", "ascend"), config_error);
}

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rover/config.hpp"
#include "rover/outputs.hpp"
#include "rover/rng.hpp"
#include "rover/spin.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rover;

namespace {

constexpr const char* kArtifactVersion = "1.0.0";

// Independent substreams of the run seed.
constexpr uint64_t kNoiseStream = 0x6E6F6973ULL;
constexpr uint64_t kStartStream = 0x73746172ULL;
constexpr uint64_t kDriverStream = 0x64726976ULL;
constexpr uint64_t kProbeStream = 0x70726F62ULL;

std::optional<uint64_t> read_env_seed() {
  const char* raw = std::getenv("ROVER_SEED");
  if (!raw || !*raw) return std::nullopt;
  uint64_t value = 0;
  const char* end = raw + std::string(raw).size();
  auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc() || ptr != end)
    throw config_error("config: ROVER_SEED must be a non-negative integer");
  return value;
}

json vec_to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

PulseShape resolve_start(const ExperimentConfig& cfg) {
  if (cfg.x_init) {
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::VectorXd>(cfg.x_init->data(), static_cast<long>(cfg.x_init->size()));
    PulseShape p(std::move(v), cfg.total_time);
    p.validate();
    return p;
  }
  return random_start(rng::derive(cfg.seed, kStartStream), cfg.n_intervals, cfg.total_time);
}

double optimal_dc_amplitude(const ExperimentConfig& cfg) {
  return (M_PI / 2.0) / (cfg.system.calib_k * cfg.total_time);
}

PulseShape probe_point(const ExperimentConfig& cfg) {
  if (cfg.probe_at == "x-init") return resolve_start(cfg);
  const double amp = optimal_dc_amplitude(cfg);
  return PulseShape::constant_y(cfg.probe_at == "optimal" ? amp : -amp, cfg.n_intervals,
                                cfg.total_time);
}

// Fixed-|Bx| random-sign start with a uniform By chosen (on the noiseless
// objective; setup only, no measurements) so that J lands on j0_target.
PulseShape build_level_start(const ExperimentConfig& cfg) {
  const int n = cfg.n_intervals;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * n);
  const uint64_t s = rng::derive(cfg.seed, kStartStream);
  for (int i = 0; i < n; ++i)
    v[i] = (rng::u01(rng::derive(s, static_cast<uint64_t>(i))) < 0.5 ? -1.0 : 1.0) * 25.0;

  auto j_at = [&](double c) {
    Eigen::VectorXd w = v;
    w.tail(n).setConstant(c);
    return objective(PulseShape(std::move(w), cfg.total_time), cfg.system);
  };
  const double target = cfg.j0_target * cfg.system.j_max;
  const double c_max = 1.6 * optimal_dc_amplitude(cfg);
  const int grid = 121;
  double best_c = 0.0;
  double best_err = std::abs(j_at(0.0) - target);
  double prev_c = 0.0, prev_j = j_at(0.0);
  double lo = -1.0, hi = -1.0;
  for (int i = 1; i < grid; ++i) {
    const double c = c_max * i / (grid - 1);
    const double j = j_at(c);
    if (lo < 0.0 && (prev_j - target) * (j - target) <= 0.0) {
      lo = prev_c;
      hi = c;
    }
    if (std::abs(j - target) < best_err) {
      best_err = std::abs(j - target);
      best_c = c;
    }
    prev_c = c;
    prev_j = j;
  }
  if (lo >= 0.0) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((j_at(lo) - target) * (j_at(mid) - target) <= 0.0)
        hi = mid;
      else
        lo = mid;
    }
    best_c = 0.5 * (lo + hi);
  }
  v.tail(n).setConstant(best_c);
  return PulseShape(std::move(v), cfg.total_time);
}

json phase_summary(const Trajectory& t, double j_max) {
  json s = {{"iterations", t.rows.empty() ? 0 : t.rows.back().iter},
            {"converged", t.converged},
            {"complete", t.complete}};
  if (!t.rows.empty()) {
    s["final_j"] = t.rows.back().j;
    s["final_j_over_jmax"] = t.rows.back().j / j_max;
    s["final_rel_distance"] = t.rows.back().rel_distance;
  }
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void read_trajectory_rows(const std::string& path, int dim,
                          std::vector<std::pair<double, Eigen::VectorXd>>& rows) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot read trajectory file \"" + path + "\"");
  std::string line;
  if (!std::getline(in, line)) throw config_error("config: empty trajectory file \"" + path + "\"");
  const std::vector<std::string> header = split(line, ',');
  int j_col = -1;
  std::vector<int> x_cols(dim, -1);
  for (size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "J") j_col = static_cast<int>(c);
    for (int i = 0; i < dim; ++i)
      if (header[c] == fmt::format("x{}", i)) x_cols[i] = static_cast<int>(c);
  }
  if (j_col < 0) throw config_error("config: no J column in \"" + path + "\"");
  for (int i = 0; i < dim; ++i)
    if (x_cols[i] < 0)
      throw config_error(fmt::format("config: no x{} column in \"{}\"", i, path));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line, ',');
    try {
      Eigen::VectorXd x(dim);
      for (int i = 0; i < dim; ++i) x[i] = std::stod(fields.at(x_cols[i]));
      rows.emplace_back(std::stod(fields.at(j_col)), std::move(x));
    } catch (const std::exception&) {
      throw config_error("config: malformed row in \"" + path + "\"");
    }
  }
}

std::string height_label(double h) {
  const int scaled = static_cast<int>(std::lround(std::abs(h) * 100.0));
  return fmt::format("{}{:03d}", h < 0 ? "m" : "", scaled);
}

json probe_once(const ExperimentConfig& cfg, Spectrometer& inst, const PulseShape& p,
                uint64_t sampling_seed, const json& extra, const std::string& file) {
  const HessianEstimate hess = hessian_least_squares(inst, p, cfg.estimator.n_samples,
                                                     cfg.estimator.delta, sampling_seed);
  const HessianSpectrum spectrum = eigendecompose(hess.h, cfg.rover.null_tol);
  const CriticalVerdict verdict =
      classify_critical_point(spectrum, 0.0, std::numeric_limits<double>::infinity());

  json doc = hessian_estimate_to_json(hess);
  doc.update(spectrum_to_json(spectrum, verdict));
  doc["x"] = vec_to_json(p.x);
  doc.update(extra);
  write_json_atomic(cfg.out_dir + "/" + file, doc);

  json item = {{"file", file},           {"j0", hess.j0},
               {"n_pos", verdict.n_pos}, {"n_neg", verdict.n_neg},
               {"n_null", verdict.n_null}, {"label", verdict.label},
               {"ls_grad_norm", hess.g.norm()}};
  item.update(extra);
  return item;
}

void cmd_gradient(const ExperimentConfig& cfg, Spectrometer& inst, json& summary,
                  std::vector<std::string>& warnings, bool& complete) {
  const PulseShape x0 = resolve_start(cfg);
  const bool ascend_primary = cfg.experiment == "ascend";
  TrajectoryWriter primary(cfg.out_dir + "/trajectory.csv", cfg.dim());
  TrajectoryWriter sibling(
      cfg.out_dir + (ascend_primary ? "/trajectory_descent.csv" : "/trajectory_ascent.csv"),
      cfg.dim());
  TrajectoryWriter* asc = ascend_primary ? &primary : &sibling;
  TrajectoryWriter* desc = ascend_primary ? &sibling : &primary;

  const AscentDescentResult res = run_ascent_descent(
      inst, cfg.estimator, x0, cfg.rover, [&](const TrajectoryRecord& r) { asc->write(r); },
      [&](const TrajectoryRecord& r) { desc->write(r); });

  summary["ascent"] = phase_summary(res.ascent, cfg.system.j_max);
  summary["descent"] = phase_summary(res.descent, cfg.system.j_max);
  summary["x_init"] = vec_to_json(x0.x);
  complete = res.ascent.complete && res.descent.complete;
  if (!res.ascent.converged && res.ascent.complete)
    warnings.push_back("ascent hit max_iter without the convergence criterion");
  if (!res.descent.converged && res.descent.complete)
    warnings.push_back("descent hit max_iter without the convergence criterion");
}

void cmd_hessian_probe(const ExperimentConfig& cfg, Spectrometer& inst, json& summary,
                       std::vector<std::string>&, bool&) {
  json items = json::array();
  int idx = 0;
  if (!cfg.trajectories.empty()) {
    std::vector<std::pair<double, Eigen::VectorXd>> rows;
    for (const std::string& path : cfg.trajectories) read_trajectory_rows(path, cfg.dim(), rows);
    if (rows.empty()) throw config_error("config: the trajectory files contain no rows");
    const double heights[] = {1.00, 0.71, 0.31, 0.03, -1.00};
    for (const double h : heights) {
      const double target = h * cfg.system.j_max;
      size_t best = 0;
      for (size_t r = 1; r < rows.size(); ++r)
        if (std::abs(rows[r].first - target) < std::abs(rows[best].first - target)) best = r;
      const PulseShape p(rows[best].second, cfg.total_time);
      const json extra = {{"height", h}, {"row_j", rows[best].first}};
      items.push_back(probe_once(cfg, inst, p, rng::derive(cfg.seed, kProbeStream + idx), extra,
                                 "hessian_" + height_label(h) + ".json"));
      ++idx;
    }
  } else {
    items.push_back(probe_once(cfg, inst, probe_point(cfg), rng::derive(cfg.seed, kProbeStream),
                               json{{"at", cfg.probe_at}}, "hessian_" + cfg.probe_at + ".json"));
  }
  summary["probes"] = items;
}

void cmd_scan_eigenvectors(const ExperimentConfig& cfg, Spectrometer& inst, json& summary,
                           std::vector<std::string>&, bool&) {
  const PulseShape p = probe_point(cfg);
  const HessianEstimate hess =
      hessian_least_squares(inst, p, cfg.estimator.n_samples, cfg.estimator.delta,
                            rng::derive(cfg.seed, kProbeStream));
  const HessianSpectrum spectrum = eigendecompose(hess.h, cfg.rover.null_tol);
  const CriticalVerdict verdict =
      classify_critical_point(spectrum, 0.0, std::numeric_limits<double>::infinity());
  json doc = hessian_estimate_to_json(hess);
  doc.update(spectrum_to_json(spectrum, verdict));
  doc["x"] = vec_to_json(p.x);
  write_json_atomic(cfg.out_dir + "/hessian_" + cfg.probe_at + ".json", doc);

  json scans = json::array();
  for (int i = 0; i < cfg.dim(); ++i) {
    const ScanResult scan =
        eigenvector_scan(inst, p, spectrum.eigenvectors.col(i), cfg.max_rel_distance, cfg.n_points);
    const std::string file = fmt::format("scan_{}.csv", i);
    write_scan_csv(cfg.out_dir + "/" + file, scan);
    scans.push_back({{"file", file},
                     {"eigenvalue", spectrum.eigenvalues[i]},
                     {"a", scan.a},
                     {"b", scan.b},
                     {"c", scan.c},
                     {"r_squared", scan.r_squared}});
  }
  summary["hessian"] = {{"n_pos", verdict.n_pos},
                        {"n_neg", verdict.n_neg},
                        {"n_null", verdict.n_null},
                        {"label", verdict.label}};
  summary["scans"] = scans;
}

void cmd_drive_top(const ExperimentConfig& cfg, Spectrometer& inst, json& summary,
                   std::vector<std::string>& warnings, bool& complete) {
  const PulseShape x_top = probe_point(cfg);
  Eigen::VectorXd h_free = Eigen::VectorXd::Ones(cfg.dim());
  if (!cfg.h_free.empty())
    h_free =
        Eigen::Map<const Eigen::VectorXd>(cfg.h_free.data(), static_cast<long>(cfg.h_free.size()));

  TrajectoryWriter writer(cfg.out_dir + "/trajectory.csv", cfg.dim());
  const TopDriveResult res =
      run_top_drive(inst, cfg.estimator, x_top, h_free, cfg.n_iter, cfg.rover,
                    rng::derive(cfg.seed, kDriverStream),
                    [&](const TrajectoryRecord& r) { writer.write(r); });

  std::vector<int> n_neg;
  for (size_t k = 0; k < res.spectra.size(); ++k) {
    write_json_atomic(fmt::format("{}/hessian_iter_{:02d}.json", cfg.out_dir, k + 1),
                      spectrum_to_json(res.spectra[k], res.verdicts[k]));
    n_neg.push_back(res.verdicts[k].n_neg);
  }
  summary["step_len"] = res.step_len;
  summary["topology_warnings"] = res.topology_warnings;
  summary["n_neg_per_iteration"] = n_neg;
  if (!res.trajectory.rows.empty()) {
    summary["final_j"] = res.trajectory.rows.back().j;
    summary["final_rel_distance"] = res.trajectory.rows.back().rel_distance;
    double min_j = std::numeric_limits<double>::infinity();
    for (const auto& r : res.trajectory.rows) min_j = std::min(min_j, r.j);
    summary["min_j"] = min_j;
  }
  if (res.topology_warnings > 0)
    warnings.push_back(
        fmt::format("{} iteration(s) reported n_neg != 2", res.topology_warnings));
  complete = res.trajectory.complete;
}

void cmd_levelset_energy(const ExperimentConfig& cfg, Spectrometer& inst, json& summary,
                         std::vector<std::string>& warnings, bool& complete) {
  const PulseShape x0 = cfg.x_init ? resolve_start(cfg) : build_level_start(cfg);
  TrajectoryWriter writer(cfg.out_dir + "/trajectory.csv", cfg.dim());
  const EnergyLevelSetResult res =
      run_levelset_energy(inst, cfg.estimator, x0, cfg.n_iter, cfg.rover,
                          [&](const TrajectoryRecord& r) { writer.write(r); });

  auto bx_by = [&](const Eigen::VectorXd& x) -> json {
    const int n = cfg.n_intervals;
    const double by = x.tail(n).norm();
    if (by == 0.0) return nullptr;
    return x.head(n).norm() / by;
  };

  json stats = json::array();
  double max_drift = 0.0;
  for (const auto& s : res.stats) {
    stats.push_back({{"j_mean", s[0]}, {"j_std", s[1]}, {"k_e", s[2]}});
    max_drift = std::max(max_drift, std::abs(s[0] - res.j0));
  }
  summary["j0"] = res.j0;
  summary["stats"] = stats;
  summary["k_e_initial"] = res.stats.front()[2];
  summary["k_e_final"] = res.stats.back()[2];
  summary["k_e_drop_fraction"] = 1.0 - res.stats.back()[2] / res.stats.front()[2];
  summary["max_abs_drift"] = max_drift;
  summary["drift_warnings"] = res.drift_warnings;
  summary["bx_by_ratio_initial"] = bx_by(x0.x);
  if (!res.trajectory.rows.empty())
    summary["bx_by_ratio_final"] = bx_by(res.trajectory.rows.back().x);
  if (res.drift_warnings > 0)
    warnings.push_back(fmt::format("{} iteration(s) drifted beyond 5x the expected |J - J0| band",
                                   res.drift_warnings));
  complete = res.trajectory.complete;
}

void cmd_levelset_distance(const ExperimentConfig& cfg, Spectrometer& inst, json& summary,
                           std::vector<std::string>& warnings, bool& complete) {
  const PulseShape x0 = cfg.x_init ? resolve_start(cfg) : build_level_start(cfg);
  TrajectoryWriter writer(cfg.out_dir + "/trajectory.csv", cfg.dim());
  const DistanceLevelSetResult res = run_levelset_distance(
      inst, cfg.estimator, x0, cfg.target_rel_distance, cfg.rover,
      rng::derive(cfg.seed, kDriverStream), [&](const TrajectoryRecord& r) { writer.write(r); });

  summary["j0"] = res.j0;
  summary["corrections"] = res.corrections;
  summary["correction_steps"] = res.correction_steps;
  summary["target_reached"] = res.target_reached;
  summary["correction_unstable"] = res.correction_unstable;
  if (!res.trajectory.rows.empty())
    summary["final_rel_distance"] = res.trajectory.rows.back().rel_distance;
  if (!res.target_reached && res.trajectory.complete)
    warnings.push_back("target relative distance not reached within max_iter iterations");
  if (res.correction_unstable)
    warnings.push_back("a correction loop hit the inner-step cap; run stopped");
  complete = res.trajectory.complete;
}

void cmd_calibrate(const ExperimentConfig& cfg, Spectrometer&, json& summary,
                   std::vector<std::string>&, bool&) {
  const double amp = optimal_dc_amplitude(cfg);
  const PulseShape dc = PulseShape::constant_y(amp, cfg.n_intervals, cfg.total_time);
  const Eigen::Vector3d m = propagate(dc, cfg.system);
  const double j = objective(dc, cfg.system);
  const double residual = (m - Eigen::Vector3d(-1, 0, 0)).norm();
  const double floor = gradient_noise_floor(cfg.sigma, cfg.dim(), cfg.estimator.d);

  summary["calib_k"] = cfg.system.calib_k;
  summary["default_calib_k"] = SpinSystemParams::default_calib_k();
  summary["dc_amplitude"] = amp;
  summary["dc_final_m"] = json{m[0], m[1], m[2]};
  summary["dc_j"] = j;
  summary["dc_residual"] = residual;
  summary["gradient_noise_floor"] = floor;
  summary["seconds_per_measurement"] = Spectrometer::seconds_per_measurement;
  summary["gradient_cost_s"] = 2.0 * cfg.dim() * Spectrometer::seconds_per_measurement;
  summary["hessian_cloud_cost_s"] =
      (cfg.estimator.n_samples + 1) * Spectrometer::seconds_per_measurement;

  fmt::print("calib_k               = {}\n", format_double(cfg.system.calib_k));
  fmt::print("dc optimum amplitude  = {}\n", format_double(amp));
  fmt::print("dc propagated m(T)    = ({}, {}, {})\n", format_double(m[0]), format_double(m[1]),
             format_double(m[2]));
  fmt::print("dc objective J        = {}\n", format_double(j));
  fmt::print("dc residual |m-(-x)|  = {}\n", format_double(residual));
  fmt::print("gradient noise floor  = {} (sigma={}, d={}, D={})\n", format_double(floor),
             format_double(cfg.sigma), format_double(cfg.estimator.d), cfg.dim());
  fmt::print("lab time: {} s/measurement, {} s/gradient, {} s/Hessian cloud\n",
             format_double(Spectrometer::seconds_per_measurement),
             format_double(2.0 * cfg.dim() * Spectrometer::seconds_per_measurement),
             format_double((cfg.estimator.n_samples + 1) * Spectrometer::seconds_per_measurement));
}

int run_experiment(const ExperimentConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  NoiseModel noise;
  noise.sigma = cfg.sigma;
  noise.seed = rng::derive(cfg.seed, kNoiseStream);
  Spectrometer inst = make_spin_spectrometer(cfg.system, noise, cfg.budget);

  json summary = json::object();
  std::vector<std::string> warnings;
  bool complete = true;
  try {
    if (cfg.experiment == "ascend" || cfg.experiment == "descend")
      cmd_gradient(cfg, inst, summary, warnings, complete);
    else if (cfg.experiment == "hessian-probe")
      cmd_hessian_probe(cfg, inst, summary, warnings, complete);
    else if (cfg.experiment == "scan-eigenvectors")
      cmd_scan_eigenvectors(cfg, inst, summary, warnings, complete);
    else if (cfg.experiment == "drive-top")
      cmd_drive_top(cfg, inst, summary, warnings, complete);
    else if (cfg.experiment == "levelset-energy")
      cmd_levelset_energy(cfg, inst, summary, warnings, complete);
    else if (cfg.experiment == "levelset-distance")
      cmd_levelset_distance(cfg, inst, summary, warnings, complete);
    else
      cmd_calibrate(cfg, inst, summary, warnings, complete);
  } catch (const budget_exhausted&) {
    complete = false;
  }
  if (!complete) warnings.push_back("measurement budget exhausted; outputs truncated");

  const json manifest = {
      {"artifact_version", kArtifactVersion},
      {"experiment", cfg.experiment},
      {"config", echo_config(cfg)},
      {"prng", {{"algorithm", NoiseModel::algorithm}, {"seed", cfg.seed}}},
      {"measurement_count", inst.ticks()},
      {"total_lab_time_sec", inst.clock().total_lab_time()},
      {"summary", summary},
      {"warnings", warnings},
      {"complete", complete},
  };
  write_json_atomic(cfg.out_dir + "/manifest.json", manifest);
  fmt::print("{}: wrote {}/manifest.json ({} measurements, {} s lab time{})\n", cfg.experiment,
             cfg.out_dir, inst.ticks(), format_double(inst.clock().total_lab_time()),
             complete ? "" : ", INCOMPLETE");
  for (const std::string& w : warnings) fmt::print("warning: {}\n", w);
  return complete ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"virtual spectrometer and landscape-exploration toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  uint64_t seed_flag = 0;
  double sigma_flag = 0.0;
  std::string out_flag;
  std::string at_flag;
  std::vector<std::string> traj_flag;

  const std::vector<std::pair<std::string, std::string>> subs = {
      {"ascend", "gradient ascent (and mirror descent) from one start"},
      {"descend", "gradient descent (and mirror ascent) from one start"},
      {"hessian-probe", "LS Hessian spectrum at a control or along stored trajectories"},
      {"scan-eigenvectors", "objective scans along every Hessian eigenvector"},
      {"drive-top", "null-space drive around the landscape top"},
      {"levelset-energy", "pulse-energy minimization along a level set"},
      {"levelset-distance", "distance maximization along a level set"},
      {"calibrate", "print calibration constants and sanity checks"},
  };
  for (const auto& [name, desc] : subs) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_flag, "seed override (highest precedence)");
    sub->add_option("--noise-sigma", sigma_flag, "noise sigma override");
    sub->add_option("--out-dir", out_flag, "output directory override");
    if (name == "hessian-probe" || name == "scan-eigenvectors" || name == "drive-top")
      sub->add_option("--at", at_flag, "probe point: optimal | minimal | x-init");
    if (name == "hessian-probe")
      sub->add_option("--trajectory", traj_flag,
                      "trajectory CSV for the five-height sweep (repeatable)");
  }

  CLI11_PARSE(app, argc, argv);
  CLI::App* sub = app.get_subcommands().front();

  try {
    ExperimentConfig cfg = load_config(config_path, sub->get_name(), read_env_seed());
    if (sub->count("--seed")) cfg.seed = seed_flag;
    if (sub->count("--noise-sigma")) cfg.sigma = sigma_flag;
    if (sub->count("--out-dir")) cfg.out_dir = out_flag;
    if (sub->get_option_no_throw("--at") && sub->count("--at")) cfg.probe_at = at_flag;
    if (sub->get_option_no_throw("--trajectory") && sub->count("--trajectory"))
      cfg.trajectories = traj_flag;
    cfg.validate();
    return run_experiment(cfg);
  } catch (const config_error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}

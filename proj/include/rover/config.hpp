#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rover/drivers.hpp"
#include "rover/pulse.hpp"

namespace rover {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fully resolved run description: per-experiment defaults overlaid with the
/// JSON config document and any CLI overrides. Unknown keys are rejected.
struct ExperimentConfig {
  std::string experiment;
  uint64_t seed = 0;

  SpinSystemParams system;
  int n_intervals = 4;
  double total_time = 500e-6;

  double sigma = 1e-3;
  std::optional<uint64_t> budget;  // measurements; absent = unlimited

  EstimatorSettings estimator;
  RoverConfig rover;
  std::string out_dir = "rover_out";

  // experiment-specific knobs (relevant subset depends on `experiment`)
  std::optional<std::vector<double>> x_init;
  int n_iter = 10;                   // drive-top, levelset-energy
  double target_rel_distance = 2.5;  // levelset-distance
  std::vector<double> h_free;        // drive-top; empty = all ones
  std::string probe_at = "optimal";  // optimal | minimal | x-init
  std::vector<std::string> trajectories;  // hessian-probe height sweep sources
  double max_rel_distance = 0.3;     // scan-eigenvectors
  int n_points = 13;                 // scan-eigenvectors, odd
  double j0_target = 0.585;          // level-set start construction

  int dim() const { return 2 * n_intervals; }
  void validate() const;
};

/// Baseline config for one experiment, before any document is applied.
ExperimentConfig default_config(const std::string& experiment);

/// Strict parse: per-experiment defaults + JSON overlay. fallback_seed (the
/// ROVER_SEED environment value) applies only when the document has no seed.
ExperimentConfig parse_config(const std::string& json_text, const std::string& experiment,
                              std::optional<uint64_t> fallback_seed = std::nullopt);
ExperimentConfig load_config(const std::string& path, const std::string& experiment,
                             std::optional<uint64_t> fallback_seed = std::nullopt);

/// Canonical JSON echo of every resolved setting (defaults included).
nlohmann::json echo_config(const ExperimentConfig& cfg);

}  // namespace rover

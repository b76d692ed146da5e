#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rover/estimators.hpp"
#include "rover/instrument.hpp"
#include "rover/spectra.hpp"

namespace rover {

/// Settings shared by all measurement-driven estimates inside the drivers.
struct EstimatorSettings {
  double d = 0.5;      // central-difference increment, field units
  double delta = 2.0;  // perturbation-cloud half width
  int n_samples = 500;
};

struct RoverConfig {
  double alpha = 0.02;             // gradient scale, sign chosen by the driver
  double beta = 1e5;               // Euler coefficient for gradient movements
  double max_step_len = 2.0;       // per-step clip, field units
  int max_iter = 200;
  double grad_floor_factor = 3.0;  // convergence threshold in noise floors
  int converge_consecutive = 3;
  double level_tolerance = 0.014;  // epsilon, objective units
  double step_len = 3.0;           // level-set march distance; <= 0 means auto
  double null_tol = 0.1;           // relative null threshold for probes
  int repeats = 5;                 // error-bar repeats in the energy run
  int correction_cap = 10;
  double j_scale = 1.0;            // objective scale for thresholds given in fractions of j_max

  void validate() const;
};

struct TrajectoryRecord {
  int iter = 0;
  double s = 0.0;  // cumulative path length, field units
  double j = 0.0;
  std::optional<double> grad_norm;
  double rel_distance = 0.0;
  std::string event;  // step | violation | correction | hessian-probe | converged
  Eigen::VectorXd x;
};

struct Trajectory {
  std::vector<TrajectoryRecord> rows;
  bool complete = true;  // false when the budget died mid-run
  bool converged = false;
};

/// Optional live consumer of trajectory rows (crash-safe CSV streaming).
using RowSink = std::function<void(const TrajectoryRecord&)>;

struct AscentDescentResult {
  Trajectory ascent;
  Trajectory descent;
};

/// Gradient ascent then descent from the same start. Convergence: estimated
/// gradient norm below grad_floor_factor x noise floor for converge_consecutive
/// iterations in a row.
AscentDescentResult run_ascent_descent(Spectrometer& instrument, const EstimatorSettings& est,
                                       const PulseShape& x_init, const RoverConfig& cfg,
                                       const RowSink& ascent_sink = nullptr,
                                       const RowSink& descent_sink = nullptr);

struct TopDriveResult {
  Trajectory trajectory;
  std::vector<HessianSpectrum> spectra;  // one per iteration
  std::vector<CriticalVerdict> verdicts;
  int topology_warnings = 0;  // iterations with n_neg != 2
  double step_len = 0.0;      // the value actually used
};

/// Null-space drive at a landscape top: per iteration an LS Hessian
/// (est.n_samples cloud), null-space projection of h_free, and a
/// constant-distance step. cfg.step_len <= 0 selects 0.25*||x_top||.
TopDriveResult run_top_drive(Spectrometer& instrument, const EstimatorSettings& est,
                             const PulseShape& x_top, const Eigen::VectorXd& h_free, int n_iter,
                             const RoverConfig& cfg, uint64_t seed, const RowSink& sink = nullptr);

struct EnergyLevelSetResult {
  Trajectory trajectory;
  double j0 = 0.0;
  std::vector<std::array<double, 3>> stats;  // per row: j_mean, j_std, k_e
  int drift_warnings = 0;
};

/// Pulse-energy minimization along the level set: g_free = -x/||x|| projected
/// orthogonal to the measured gradient, Euler steps clipped at cfg.step_len,
/// J tracked with cfg.repeats-measurement error bars.
EnergyLevelSetResult run_levelset_energy(Spectrometer& instrument, const EstimatorSettings& est,
                                         const PulseShape& x_init, int n_iter,
                                         const RoverConfig& cfg, const RowSink& sink = nullptr);

struct DistanceLevelSetResult {
  Trajectory trajectory;
  double j0 = 0.0;
  int corrections = 0;       // correction events (each may take several inner steps)
  int correction_steps = 0;  // total inner steps
  bool target_reached = false;
  bool correction_unstable = false;  // an event hit the inner-step cap
};

/// Distance-maximizing level-set walk: march a constant distance along the
/// stale projected direction; when |J - j0| > epsilon, remeasure the gradient,
/// apply gradient corrections until back inside epsilon, then point g_free
/// along x - x(0) and continue. Stops at rel_distance >= target_rel_distance
/// or after cfg.max_iter marches.
DistanceLevelSetResult run_levelset_distance(Spectrometer& instrument,
                                             const EstimatorSettings& est,
                                             const PulseShape& x_init, double target_rel_distance,
                                             const RoverConfig& cfg, uint64_t seed,
                                             const RowSink& sink = nullptr);

/// Random start with components uniform on [-20, 20], derived from seed.
PulseShape random_start(uint64_t seed, int n_intervals = 4, double total_time = 500e-6);

}  // namespace rover

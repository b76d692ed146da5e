#include "rover/drivers.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <utility>

#include "rover/movements.hpp"
#include "rover/rng.hpp"

namespace rover {

namespace {

constexpr double kTypicalDriftBand = 0.003;  // observed |J - J0| band, objective units
constexpr uint64_t kGFreeStream = 0xF5EE0001ULL;

void push_row(Trajectory& out, const RowSink& sink, TrajectoryRecord rec) {
  if (sink) sink(rec);
  out.rows.push_back(std::move(rec));
}

PulseShape with_x(const PulseShape& proto, const Eigen::VectorXd& x) {
  PulseShape p = proto;
  p.x = x;
  return p;
}

// One gradient phase; sign > 0 ascends, sign < 0 descends. Budget exhaustion
// leaves the rows pushed so far and flags the trajectory incomplete.
void run_phase(Spectrometer& instrument, const EstimatorSettings& est, const PulseShape& x_init,
               const RoverConfig& cfg, double sign, Trajectory& out, const RowSink& sink) {
  const Eigen::VectorXd x0 = x_init.x;
  const int dim = static_cast<int>(x_init.dim());
  const double floor = gradient_noise_floor(instrument.noise().sigma, dim, est.d);
  const double threshold = cfg.grad_floor_factor * floor;

  Eigen::VectorXd x = x0;
  double s = 0.0;
  int consec = 0;
  try {
    TrajectoryRecord first;
    first.j = instrument.measure(x_init).value;
    first.event = "step";
    first.x = x;
    push_row(out, sink, std::move(first));

    for (int k = 1; k <= cfg.max_iter; ++k) {
      const GradientEstimate grad = gradient_central_diff(instrument, with_x(x_init, x), est.d);
      const double gn = grad.g.norm();
      consec = (gn < threshold) ? consec + 1 : 0;
      if (consec >= cfg.converge_consecutive) {
        TrajectoryRecord rec;
        rec.iter = k;
        rec.s = s;
        rec.j = instrument.measure(with_x(x_init, x)).value;
        rec.grad_norm = gn;
        rec.rel_distance = relative_distance(x, x0);
        rec.event = "converged";
        rec.x = x;
        push_row(out, sink, std::move(rec));
        out.converged = true;
        return;
      }
      const Eigen::VectorXd f = direction_gradient(grad.g, sign * cfg.alpha);
      const Eigen::VectorXd x_new = euler_step(x, f, cfg.beta, cfg.max_step_len);
      s += (x_new - x).norm();
      x = x_new;

      TrajectoryRecord rec;
      rec.iter = k;
      rec.s = s;
      rec.j = instrument.measure(with_x(x_init, x)).value;
      rec.grad_norm = gn;
      rec.rel_distance = relative_distance(x, x0);
      rec.event = "step";
      rec.x = x;
      push_row(out, sink, std::move(rec));
    }
  } catch (const budget_exhausted&) {
    out.complete = false;
  }
}

}  // namespace

void RoverConfig::validate() const {
  if (!(alpha == alpha)) throw std::invalid_argument("RoverConfig: alpha must be a number");
  if (beta <= 0.0) throw std::invalid_argument("RoverConfig: beta must be > 0");
  if (max_step_len <= 0.0) throw std::invalid_argument("RoverConfig: max_step_len must be > 0");
  if (max_iter < 1) throw std::invalid_argument("RoverConfig: max_iter must be >= 1");
  if (grad_floor_factor <= 0.0)
    throw std::invalid_argument("RoverConfig: grad_floor_factor must be > 0");
  if (converge_consecutive < 1)
    throw std::invalid_argument("RoverConfig: converge_consecutive must be >= 1");
  if (level_tolerance < 0.0)
    throw std::invalid_argument("RoverConfig: level_tolerance must be >= 0");
  if (null_tol <= 0.0) throw std::invalid_argument("RoverConfig: null_tol must be > 0");
  if (repeats < 1) throw std::invalid_argument("RoverConfig: repeats must be >= 1");
  if (correction_cap < 1) throw std::invalid_argument("RoverConfig: correction_cap must be >= 1");
  if (j_scale <= 0.0) throw std::invalid_argument("RoverConfig: j_scale must be > 0");
}

AscentDescentResult run_ascent_descent(Spectrometer& instrument, const EstimatorSettings& est,
                                       const PulseShape& x_init, const RoverConfig& cfg,
                                       const RowSink& ascent_sink, const RowSink& descent_sink) {
  cfg.validate();
  x_init.validate();
  AscentDescentResult result;
  run_phase(instrument, est, x_init, cfg, +1.0, result.ascent, ascent_sink);
  if (!result.ascent.complete) {
    result.descent.complete = false;
    return result;
  }
  run_phase(instrument, est, x_init, cfg, -1.0, result.descent, descent_sink);
  return result;
}

TopDriveResult run_top_drive(Spectrometer& instrument, const EstimatorSettings& est,
                             const PulseShape& x_top, const Eigen::VectorXd& h_free, int n_iter,
                             const RoverConfig& cfg, uint64_t seed, const RowSink& sink) {
  cfg.validate();
  x_top.validate();
  if (h_free.size() != static_cast<long>(x_top.dim()))
    throw std::invalid_argument("run_top_drive: h_free length does not match the pulse");
  if (n_iter < 0) throw std::invalid_argument("run_top_drive: n_iter must be >= 0");

  TopDriveResult result;
  const Eigen::VectorXd x0 = x_top.x;
  Eigen::VectorXd x = x0;
  double s = 0.0;
  try {
    const RepeatedMeasurement pre = instrument.measure_repeated(x_top, 5);
    if (pre.mean < 0.99 * cfg.j_scale)
      throw std::invalid_argument("run_top_drive: start is not a landscape top (J < 0.99)");
    result.step_len = cfg.step_len > 0.0 ? cfg.step_len : 0.25 * x0.norm();

    TrajectoryRecord first;
    first.j = pre.mean;
    first.event = "step";
    first.x = x;
    push_row(result.trajectory, sink, std::move(first));

    for (int k = 1; k <= n_iter; ++k) {
      const HessianEstimate hess = hessian_least_squares(
          instrument, with_x(x_top, x), est.n_samples, est.delta, rng::derive(seed, k));
      HessianSpectrum spectrum = eigendecompose(hess.h, cfg.null_tol);
      const CriticalVerdict verdict =
          classify_critical_point(spectrum, 0.0, std::numeric_limits<double>::infinity());
      if (verdict.n_neg != 2) ++result.topology_warnings;

      const Eigen::MatrixXd basis = null_space(spectrum, cfg.null_tol);
      const Eigen::VectorXd f = direction_null_space(basis, h_free);
      Eigen::VectorXd x_new = x;
      if (f.norm() > 1e-12) x_new = x + result.step_len * f.normalized();
      s += (x_new - x).norm();
      x = x_new;

      TrajectoryRecord rec;
      rec.iter = k;
      rec.s = s;
      rec.j = instrument.measure(with_x(x_top, x)).value;
      rec.grad_norm = hess.g.norm();
      rec.rel_distance = relative_distance(x, x0);
      rec.event = "hessian-probe";
      rec.x = x;
      push_row(result.trajectory, sink, std::move(rec));
      result.spectra.push_back(std::move(spectrum));
      result.verdicts.push_back(verdict);
    }
  } catch (const budget_exhausted&) {
    result.trajectory.complete = false;
  }
  return result;
}

EnergyLevelSetResult run_levelset_energy(Spectrometer& instrument, const EstimatorSettings& est,
                                         const PulseShape& x_init, int n_iter,
                                         const RoverConfig& cfg, const RowSink& sink) {
  cfg.validate();
  x_init.validate();
  if (n_iter < 0) throw std::invalid_argument("run_levelset_energy: n_iter must be >= 0");
  if (cfg.step_len <= 0.0)
    throw std::invalid_argument("run_levelset_energy: step_len must be > 0");

  EnergyLevelSetResult result;
  const Eigen::VectorXd x0 = x_init.x;
  const int dim = static_cast<int>(x_init.dim());
  const double floor = gradient_noise_floor(instrument.noise().sigma, dim, est.d);
  const double drift_band = 5.0 * kTypicalDriftBand * cfg.j_scale;

  Eigen::VectorXd x = x0;
  double s = 0.0;
  try {
    const RepeatedMeasurement rep0 = instrument.measure_repeated(x_init, cfg.repeats);
    result.j0 = rep0.mean;
    result.stats.push_back({rep0.mean, rep0.std, x.squaredNorm()});

    TrajectoryRecord first;
    first.j = rep0.mean;
    first.event = "step";
    first.x = x;
    push_row(result.trajectory, sink, std::move(first));

    for (int k = 1; k <= n_iter; ++k) {
      const GradientEstimate grad = gradient_central_diff(instrument, with_x(x_init, x), est.d);
      const double gn = grad.g.norm();
      if (k == 1 && gn <= floor)
        throw std::invalid_argument(
            "run_levelset_energy: start looks critical (gradient at the noise floor)");

      Eigen::VectorXd g_free = Eigen::VectorXd::Zero(dim);
      const double xn = x.norm();
      if (xn > 0.0) g_free = -x / xn;
      const Eigen::VectorXd f = direction_level_set(grad.g, g_free);
      const Eigen::VectorXd x_new = euler_step(x, f, cfg.step_len, cfg.step_len);
      s += (x_new - x).norm();
      x = x_new;

      const RepeatedMeasurement rep = instrument.measure_repeated(with_x(x_init, x), cfg.repeats);
      if (std::abs(rep.mean - result.j0) > drift_band) ++result.drift_warnings;
      result.stats.push_back({rep.mean, rep.std, x.squaredNorm()});

      TrajectoryRecord rec;
      rec.iter = k;
      rec.s = s;
      rec.j = rep.mean;
      rec.grad_norm = gn;
      rec.rel_distance = relative_distance(x, x0);
      rec.event = "step";
      rec.x = x;
      push_row(result.trajectory, sink, std::move(rec));
    }
  } catch (const budget_exhausted&) {
    result.trajectory.complete = false;
  }
  return result;
}

DistanceLevelSetResult run_levelset_distance(Spectrometer& instrument,
                                             const EstimatorSettings& est,
                                             const PulseShape& x_init, double target_rel_distance,
                                             const RoverConfig& cfg, uint64_t seed,
                                             const RowSink& sink) {
  cfg.validate();
  x_init.validate();
  if (target_rel_distance <= 0.0)
    throw std::invalid_argument("run_levelset_distance: target_rel_distance must be > 0");
  if (cfg.step_len <= 0.0)
    throw std::invalid_argument("run_levelset_distance: step_len must be > 0");

  DistanceLevelSetResult result;
  const Eigen::VectorXd x0 = x_init.x;
  const int dim = static_cast<int>(x_init.dim());
  const double floor = gradient_noise_floor(instrument.noise().sigma, dim, est.d);
  const double epsilon = cfg.level_tolerance;

  Eigen::VectorXd x = x0;
  double s = 0.0;
  try {
    result.j0 = instrument.measure(x_init).value;
    GradientEstimate grad = gradient_central_diff(instrument, x_init, est.d);
    if (grad.g.norm() <= floor)
      throw std::invalid_argument(
          "run_levelset_distance: start looks critical (gradient at the noise floor)");

    Eigen::VectorXd g_free(dim);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(dim);
    const uint64_t gseed = rng::derive(seed, kGFreeStream);
    for (uint64_t attempt = 0; attempt < 8 && dir.norm() <= 1e-12; ++attempt) {
      for (int i = 0; i < dim; ++i)
        g_free[i] = rng::gaussian(gseed, attempt * static_cast<uint64_t>(dim) + i);
      dir = direction_level_set(grad.g, g_free);
    }
    if (dir.norm() <= 1e-12)
      throw std::runtime_error("run_levelset_distance: could not build a level-set direction");
    dir.normalize();

    TrajectoryRecord first;
    first.j = result.j0;
    first.grad_norm = grad.g.norm();
    first.event = "step";
    first.x = x;
    push_row(result.trajectory, sink, std::move(first));

    for (int k = 1; k <= cfg.max_iter; ++k) {
      Eigen::VectorXd x_new = x + cfg.step_len * dir;
      s += (x_new - x).norm();
      x = x_new;
      double j = instrument.measure(with_x(x_init, x)).value;

      if (std::abs(j - result.j0) <= epsilon) {
        TrajectoryRecord rec;
        rec.iter = k;
        rec.s = s;
        rec.j = j;
        rec.rel_distance = relative_distance(x, x0);
        rec.event = "step";
        rec.x = x;
        push_row(result.trajectory, sink, std::move(rec));
      } else {
        TrajectoryRecord viol;
        viol.iter = k;
        viol.s = s;
        viol.j = j;
        viol.rel_distance = relative_distance(x, x0);
        viol.event = "violation";
        viol.x = x;
        push_row(result.trajectory, sink, std::move(viol));

        grad = gradient_central_diff(instrument, with_x(x_init, x), est.d);
        const double gn = grad.g.norm();
        int inner = 0;
        while (std::abs(j - result.j0) > epsilon) {
          if (inner >= cfg.correction_cap) {
            result.correction_unstable = true;
            break;
          }
          const Eigen::VectorXd x_corr = gradient_correction(x, j, result.j0, grad.g);
          s += (x_corr - x).norm();
          x = x_corr;
          j = instrument.measure(with_x(x_init, x)).value;
          ++inner;
          ++result.correction_steps;

          TrajectoryRecord rec;
          rec.iter = k;
          rec.s = s;
          rec.j = j;
          rec.grad_norm = gn;
          rec.rel_distance = relative_distance(x, x0);
          rec.event = "correction";
          rec.x = x;
          push_row(result.trajectory, sink, std::move(rec));
        }
        if (result.correction_unstable) break;
        ++result.corrections;

        const Eigen::VectorXd away = x - x0;
        if (away.norm() > 0.0) {
          const Eigen::VectorXd fresh = direction_level_set(grad.g, away.normalized());
          if (fresh.norm() > 1e-12) dir = fresh.normalized();
        }
      }

      if (relative_distance(x, x0) >= target_rel_distance) {
        result.target_reached = true;
        break;
      }
    }
  } catch (const budget_exhausted&) {
    result.trajectory.complete = false;
  }
  return result;
}

PulseShape random_start(uint64_t seed, int n_intervals, double total_time) {
  if (n_intervals < 1) throw std::invalid_argument("random_start: n_intervals must be >= 1");
  Eigen::VectorXd v(2 * n_intervals);
  for (long i = 0; i < v.size(); ++i)
    v[i] = rng::uniform(seed, static_cast<uint64_t>(i), -20.0, 20.0);
  PulseShape p(std::move(v), total_time);
  p.validate();
  return p;
}

}  // namespace rover

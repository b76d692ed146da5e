#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace rover {

/// Piecewise-constant control pulse. The control vector holds the N Bx
/// amplitudes followed by the N By amplitudes (field units); every interval
/// lasts total_time / N seconds.
struct PulseShape {
  Eigen::VectorXd x;
  double total_time = 500e-6;

  PulseShape() = default;
  explicit PulseShape(Eigen::VectorXd fields, double time = 500e-6)
      : x(std::move(fields)), total_time(time) {}

  int n_intervals() const { return static_cast<int>(x.size()) / 2; }
  int dim() const { return static_cast<int>(x.size()); }
  double dt() const { return total_time / n_intervals(); }
  double bx(int i) const { return x[i]; }
  double by(int i) const { return x[n_intervals() + i]; }

  void validate() const {
    if (x.size() < 2 || x.size() % 2 != 0)
      throw std::invalid_argument("PulseShape: control vector must have even length >= 2");
    if (!(total_time > 0.0))
      throw std::invalid_argument("PulseShape: total_time must be positive");
  }

  /// Zero Bx, constant By = amplitude on every interval.
  static PulseShape constant_y(double amplitude, int n = 4, double time = 500e-6) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(2 * n);
    v.tail(n).setConstant(amplitude);
    return PulseShape(std::move(v), time);
  }
};

/// Spin-system constants. calib_k folds the gyromagnetic ratio and probe
/// scaling into one number fixed by the calibration: a constant pulse of
/// amplitude 37 over 500 us is a 90-degree rotation, so
/// calib_k * 37 * 500e-6 = pi/2.
struct SpinSystemParams {
  double calib_k = default_calib_k();
  double detuning = 0.0;  // rad/s, 0 on resonance
  double j_max = 1.0;

  static constexpr double default_calib_k() { return M_PI / (2.0 * 37.0 * 500e-6); }

  void validate() const {
    if (!(calib_k > 0.0)) throw std::invalid_argument("SpinSystemParams: calib_k must be positive");
    if (!(j_max > 0.0)) throw std::invalid_argument("SpinSystemParams: j_max must be positive");
  }
};

}  // namespace rover

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>

#include "rover/instrument.hpp"

namespace rover {

struct GradientEstimate {
  Eigen::VectorXd g;
  Eigen::VectorXd d;          // per-component increments, field units
  int measurements_used = 0;  // 2D for central differences
};

struct HessianEstimate {
  Eigen::MatrixXd h;  // symmetric by construction
  Eigen::VectorXd g;
  double j0 = 0.0;
  int n_samples = 0;
  double delta = 0.0;
  double residual_rms = 0.0;
  int measurements_used = 0;  // n_samples + 1
};

/// Central-difference gradient: g_i = [J(x0 + d_i e_i) - J(x0 - d_i e_i)]/(2 d_i).
/// Costs exactly 2D measurements.
GradientEstimate gradient_central_diff(Spectrometer& instrument, const PulseShape& x0,
                                       const Eigen::VectorXd& d);
GradientEstimate gradient_central_diff(Spectrometer& instrument, const PulseShape& x0, double d);

/// Noise-induced floor on the gradient norm: sigma * sqrt(D) / (sqrt(2) * d).
double gradient_noise_floor(double sigma, int dim, double d);

/// Least-squares gradient and Hessian from a perturbation cloud: n_samples
/// controls x0 + dx with dx components i.i.d. uniform on [-delta, delta],
/// fitted to the second-order Taylor model with J(x0) measured once as a known
/// constant. Costs exactly n_samples + 1 measurements. The solve uses a
/// rank-revealing QR; a rank-deficient design matrix is an error.
HessianEstimate hessian_least_squares(Spectrometer& instrument, const PulseShape& x0,
                                      int n_samples, double delta,
                                      std::optional<uint64_t> sampling_seed = std::nullopt);

}  // namespace rover

#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "rover/instrument.hpp"

namespace rover {

/// Eigen-decomposition of a symmetric Hessian, eigenvalues sorted descending,
/// eigenvector signs fixed (largest-magnitude component positive).
struct HessianSpectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns matched to eigenvalues
  std::vector<bool> null_mask;   // |lambda_i| <= null_tol
  double null_tol = 0.0;         // absolute null-band threshold
  double neg_tol = 0.0;          // absolute significant-curvature threshold

  int count_null() const;
  int count_negative() const;  // strictly below -neg_tol
  int count_positive() const;  // strictly above +neg_tol; the gap counts as neither
};

struct CriticalVerdict {
  int n_pos = 0;
  int n_neg = 0;
  int n_null = 0;
  std::string label;  // max-like | min-like | saddle | non-critical
};

/// relative_tol scales max|lambda| into the absolute null threshold; 0.1 suits
/// noisy LS Hessians, 1e-6 oracle Hessians. All-zero spectra fall back to an
/// absolute 1e-12 threshold.
/// negative_ratio widens the significant-curvature threshold relative to the
/// null band (neg_tol = negative_ratio * null_tol), so noisy eigenvalues in
/// between count neither as flat nor as curved.
HessianSpectrum eigendecompose(const Eigen::MatrixXd& h, double relative_tol = 0.1,
                               double negative_ratio = 3.0);

/// Orthonormal basis (columns) of the near-null eigenspace under the given
/// relative tolerance.
Eigen::MatrixXd null_space(const HessianSpectrum& spectrum, double relative_tol);

/// Sign-count classification; non-critical whenever grad_norm > grad_floor.
CriticalVerdict classify_critical_point(const HessianSpectrum& spectrum, double grad_norm,
                                        double grad_floor);

/// Straight-line scan along v: measures J at x0 + t*||x0||*v over a symmetric
/// grid of n_points (odd, so t = 0 is included), then fits J(t) = a t^2 + b t + c.
struct ScanResult {
  Eigen::VectorXd t;  // relative-distance abscissa
  Eigen::VectorXd j;
  double a = 0.0, b = 0.0, c = 0.0;
  double r_squared = 0.0;
  int measurements_used = 0;
};

ScanResult eigenvector_scan(Spectrometer& instrument, const PulseShape& x0,
                            const Eigen::VectorXd& v, double max_rel_distance, int n_points);

/// ||x - x0|| / ||x0||.
double relative_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& x0);

}  // namespace rover

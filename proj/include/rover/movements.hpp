#pragma once

#include <Eigen/Core>

namespace rover {

/// Forward-Euler step x + beta*F, rescaled to max_step_len when longer.
Eigen::VectorXd euler_step(const Eigen::VectorXd& x, const Eigen::VectorXd& f, double beta,
                           double max_step_len);

/// Movement along a fixed direction; rejects the zero vector.
Eigen::VectorXd direction_fixed(const Eigen::VectorXd& c);

/// Gradient movement alpha * g: alpha > 0 ascends, alpha < 0 descends.
Eigen::VectorXd direction_gradient(const Eigen::VectorXd& gradient, double alpha);

/// Component of g_free orthogonal to the gradient (non-critical level set).
/// A zero gradient is a critical point; use direction_null_space there.
Eigen::VectorXd direction_level_set(const Eigen::VectorXd& gradient,
                                    const Eigen::VectorXd& g_free);

/// Projection of h_free onto the span of the orthonormal basis columns; an
/// empty basis (isolated critical point) returns zero.
Eigen::VectorXd direction_null_space(const Eigen::MatrixXd& null_basis,
                                     const Eigen::VectorXd& h_free);

/// Restoring move x - [(j_measured - j0)/||g||^2] g; exact on linear models.
Eigen::VectorXd gradient_correction(const Eigen::VectorXd& x, double j_measured, double j0,
                                    const Eigen::VectorXd& gradient);

}  // namespace rover

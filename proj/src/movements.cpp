#include "rover/movements.hpp"

#include <stdexcept>

namespace rover {

Eigen::VectorXd euler_step(const Eigen::VectorXd& x, const Eigen::VectorXd& f, double beta,
                           double max_step_len) {
  if (f.size() != x.size()) throw std::invalid_argument("euler_step: dimension mismatch");
  if (!(beta > 0.0)) throw std::invalid_argument("euler_step: beta must be positive");
  if (!(max_step_len > 0.0)) throw std::invalid_argument("euler_step: max_step_len must be positive");
  Eigen::VectorXd step = beta * f;
  const double len = step.norm();
  if (len > max_step_len) step *= max_step_len / len;
  return x + step;
}

Eigen::VectorXd direction_fixed(const Eigen::VectorXd& c) {
  if (c.norm() == 0.0) throw std::invalid_argument("direction_fixed: zero direction");
  return c;
}

Eigen::VectorXd direction_gradient(const Eigen::VectorXd& gradient, double alpha) {
  return alpha * gradient;
}

Eigen::VectorXd direction_level_set(const Eigen::VectorXd& gradient,
                                    const Eigen::VectorXd& g_free) {
  if (g_free.size() != gradient.size())
    throw std::invalid_argument("direction_level_set: dimension mismatch");
  const double gg = gradient.squaredNorm();
  if (gg == 0.0)
    throw std::invalid_argument(
        "direction_level_set: zero gradient (critical point, use direction_null_space)");
  return g_free - gradient * (gradient.dot(g_free) / gg);
}

Eigen::VectorXd direction_null_space(const Eigen::MatrixXd& null_basis,
                                     const Eigen::VectorXd& h_free) {
  if (null_basis.cols() == 0) return Eigen::VectorXd::Zero(h_free.size());
  if (null_basis.rows() != h_free.size())
    throw std::invalid_argument("direction_null_space: dimension mismatch");
  return null_basis * (null_basis.transpose() * h_free);
}

Eigen::VectorXd gradient_correction(const Eigen::VectorXd& x, double j_measured, double j0,
                                    const Eigen::VectorXd& gradient) {
  if (gradient.size() != x.size())
    throw std::invalid_argument("gradient_correction: dimension mismatch");
  const double gg = gradient.squaredNorm();
  if (gg == 0.0)
    throw std::invalid_argument("gradient_correction: zero gradient (correction impossible)");
  return x - gradient * ((j_measured - j0) / gg);
}

}  // namespace rover

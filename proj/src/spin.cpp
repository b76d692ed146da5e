#include "rover/spin.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <vector>

namespace rover {

namespace {

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d& v) {
  Eigen::Matrix3d k;
  k << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return k;
}

// Right Jacobian of SO(3): exp([phi + e]x) = exp([phi]x) exp([Jr(phi) e]x) + O(e^2).
Eigen::Matrix3d right_jacobian(const Eigen::Vector3d& phi) {
  const double th2 = phi.squaredNorm();
  const Eigen::Matrix3d k = cross_matrix(phi);
  if (th2 < 1e-8) return Eigen::Matrix3d::Identity() - 0.5 * k + (1.0 / 6.0) * k * k;
  const double th = std::sqrt(th2);
  return Eigen::Matrix3d::Identity() - ((1.0 - std::cos(th)) / th2) * k +
         ((th - std::sin(th)) / (th2 * th)) * k * k;
}

Eigen::Vector3d interval_omega(double bx, double by, const SpinSystemParams& p) {
  return {p.calib_k * bx, p.calib_k * by, -p.detuning};
}

}  // namespace

Eigen::Matrix3d interval_rotation(double bx, double by, double dt, const SpinSystemParams& params) {
  if (!(dt > 0.0)) throw std::invalid_argument("interval_rotation: dt must be positive");
  params.validate();
  const Eigen::Vector3d omega = interval_omega(bx, by, params);
  const double w = omega.norm();
  if (w == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(-w * dt, omega / w).toRotationMatrix();
}

Eigen::Vector3d propagate(const PulseShape& pulse, const SpinSystemParams& params,
                          const Eigen::Vector3d& m0) {
  pulse.validate();
  const int n = pulse.n_intervals();
  const double dt = pulse.dt();
  Eigen::Vector3d m = m0;
  for (int i = 0; i < n; ++i) m = interval_rotation(pulse.bx(i), pulse.by(i), dt, params) * m;
  return m;
}

double objective(const PulseShape& pulse, const SpinSystemParams& params) {
  return -params.j_max * propagate(pulse, params).x();
}

Eigen::VectorXd analytic_gradient(const PulseShape& pulse, const SpinSystemParams& params) {
  pulse.validate();
  params.validate();
  const int n = pulse.n_intervals();
  const double dt = pulse.dt();

  std::vector<Eigen::Matrix3d> rot(n);
  std::vector<Eigen::Vector3d> pre(n + 1);  // state entering interval i
  pre[0] = Eigen::Vector3d(0, 0, 1);
  for (int i = 0; i < n; ++i) {
    rot[i] = interval_rotation(pulse.bx(i), pulse.by(i), dt, params);
    pre[i + 1] = rot[i] * pre[i];
  }

  // suf[i] = (R_{n-1} ... R_{i+1})^T e_x, so suf[i] . v = e_x^T Suffix_i v
  std::vector<Eigen::Vector3d> suf(n);
  suf[n - 1] = Eigen::Vector3d::UnitX();
  for (int i = n - 2; i >= 0; --i) suf[i] = rot[i + 1].transpose() * suf[i + 1];

  const Eigen::Vector3d dphi_dbx(-dt * params.calib_k, 0, 0);
  const Eigen::Vector3d dphi_dby(0, -dt * params.calib_k, 0);

  Eigen::VectorXd g(2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d phi = -dt * interval_omega(pulse.bx(i), pulse.by(i), params);
    const Eigen::Matrix3d jr = right_jacobian(phi);
    // dR/db m = R [(Jr dphi/db)]x m
    const Eigen::Vector3d vx = rot[i] * (jr * dphi_dbx).cross(pre[i]);
    const Eigen::Vector3d vy = rot[i] * (jr * dphi_dby).cross(pre[i]);
    g[i] = -params.j_max * suf[i].dot(vx);
    g[n + i] = -params.j_max * suf[i].dot(vy);
  }
  return g;
}

Eigen::MatrixXd analytic_hessian(const PulseShape& pulse, const SpinSystemParams& params,
                                 double step) {
  if (!(step > 0.0)) throw std::invalid_argument("analytic_hessian: step must be positive");
  const int d = pulse.dim();
  Eigen::MatrixXd h(d, d);
  PulseShape p = pulse, q = pulse;
  for (int i = 0; i < d; ++i) {
    p.x = pulse.x;
    q.x = pulse.x;
    p.x[i] += step;
    q.x[i] -= step;
    h.col(i) = (analytic_gradient(p, params) - analytic_gradient(q, params)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

Eigen::Matrix2cd density_matrix(const Eigen::Vector3d& m) {
  using namespace std::complex_literals;
  Eigen::Matrix2cd rho;
  rho << 1.0 + m.z(), m.x() - 1i * m.y(), m.x() + 1i * m.y(), 1.0 - m.z();
  return 0.5 * rho;
}

}  // namespace rover

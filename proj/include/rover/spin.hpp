#pragma once

#include <Eigen/Core>
#include <complex>

#include "rover/pulse.hpp"

namespace rover {

/// Rotation applied to the Bloch vector by one constant-field interval.
/// Convention: dM/dt = M x Omega with Omega = (calib_k*bx, calib_k*by, -detuning),
/// i.e. the returned matrix is exp(-dt*[Omega]x). A +y field of amplitude 37
/// over 500 us maps +z to -x.
Eigen::Matrix3d interval_rotation(double bx, double by, double dt, const SpinSystemParams& params);

/// Composition of the N interval rotations in time order, applied to m0.
Eigen::Vector3d propagate(const PulseShape& pulse, const SpinSystemParams& params,
                          const Eigen::Vector3d& m0 = Eigen::Vector3d(0, 0, 1));

/// J = -mx(T) * j_max for the initial state m0 = (0,0,1).
double objective(const PulseShape& pulse, const SpinSystemParams& params);

/// Exact dJ/dx via closed-form derivatives of the rotation chain.
Eigen::VectorXd analytic_gradient(const PulseShape& pulse, const SpinSystemParams& params);

/// Symmetric Hessian from central differences of analytic_gradient.
Eigen::MatrixXd analytic_hessian(const PulseShape& pulse, const SpinSystemParams& params,
                                 double step = 1e-5);

/// Density-matrix view of a Bloch vector: rho = (I + m . sigma)/2.
Eigen::Matrix2cd density_matrix(const Eigen::Vector3d& m);

}  // namespace rover

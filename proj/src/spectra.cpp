#include "rover/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <cmath>

namespace rover {

int HessianSpectrum::count_null() const {
  int n = 0;
  for (bool b : null_mask) n += b;
  return n;
}

int HessianSpectrum::count_negative() const {
  int n = 0;
  for (int i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] < -neg_tol) ++n;
  return n;
}

int HessianSpectrum::count_positive() const {
  int n = 0;
  for (int i = 0; i < eigenvalues.size(); ++i)
    if (eigenvalues[i] > neg_tol) ++n;
  return n;
}

HessianSpectrum eigendecompose(const Eigen::MatrixXd& h, double relative_tol,
                               double negative_ratio) {
  if (h.rows() != h.cols()) throw std::invalid_argument("eigendecompose: matrix must be square");
  if (!(relative_tol >= 0.0))
    throw std::invalid_argument("eigendecompose: relative_tol must be >= 0");
  if (!(negative_ratio >= 1.0))
    throw std::invalid_argument("eigendecompose: negative_ratio must be >= 1");
  const double scale = h.cwiseAbs().maxCoeff();
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + scale))
    throw std::invalid_argument("eigendecompose: matrix must be symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("eigendecompose: eigensolver failed");

  const int d = static_cast<int>(h.rows());
  HessianSpectrum s;
  s.eigenvalues.resize(d);
  s.eigenvectors.resize(d, d);
  for (int i = 0; i < d; ++i) {  // solver returns ascending order
    s.eigenvalues[i] = solver.eigenvalues()[d - 1 - i];
    s.eigenvectors.col(i) = solver.eigenvectors().col(d - 1 - i);
  }
  for (int i = 0; i < d; ++i) {  // sign convention: largest-|entry| component positive
    int arg = 0;
    for (int r = 1; r < d; ++r)
      if (std::abs(s.eigenvectors(r, i)) > std::abs(s.eigenvectors(arg, i))) arg = r;
    if (s.eigenvectors(arg, i) < 0.0) s.eigenvectors.col(i) *= -1.0;
  }

  const double max_abs = s.eigenvalues.cwiseAbs().maxCoeff();
  s.null_tol = (max_abs > 0.0) ? relative_tol * max_abs : 1e-12;
  s.neg_tol = negative_ratio * s.null_tol;
  s.null_mask.resize(d);
  for (int i = 0; i < d; ++i) s.null_mask[i] = std::abs(s.eigenvalues[i]) <= s.null_tol;
  return s;
}

Eigen::MatrixXd null_space(const HessianSpectrum& spectrum, double relative_tol) {
  const int d = static_cast<int>(spectrum.eigenvalues.size());
  const double max_abs = spectrum.eigenvalues.cwiseAbs().maxCoeff();
  const double tol = (max_abs > 0.0) ? relative_tol * max_abs : 1e-12;
  std::vector<int> keep;
  for (int i = 0; i < d; ++i)
    if (std::abs(spectrum.eigenvalues[i]) <= tol) keep.push_back(i);
  Eigen::MatrixXd basis(d, keep.size());
  for (size_t c = 0; c < keep.size(); ++c) basis.col(c) = spectrum.eigenvectors.col(keep[c]);
  return basis;
}

CriticalVerdict classify_critical_point(const HessianSpectrum& spectrum, double grad_norm,
                                        double grad_floor) {
  CriticalVerdict v;
  v.n_null = spectrum.count_null();
  v.n_neg = spectrum.count_negative();
  v.n_pos = spectrum.count_positive();
  if (grad_norm > grad_floor) {
    v.label = "non-critical";
  } else if (v.n_neg > 0 && v.n_pos == 0) {
    v.label = "max-like";
  } else if (v.n_pos > 0 && v.n_neg == 0) {
    v.label = "min-like";
  } else {
    v.label = "saddle";
  }
  return v;
}

ScanResult eigenvector_scan(Spectrometer& instrument, const PulseShape& x0,
                            const Eigen::VectorXd& v, double max_rel_distance, int n_points) {
  x0.validate();
  if (v.size() != x0.dim()) throw std::invalid_argument("eigenvector_scan: direction length");
  if (std::abs(v.norm() - 1.0) > 1e-9)
    throw std::invalid_argument("eigenvector_scan: direction must be unit length");
  if (n_points < 5 || n_points % 2 == 0)
    throw std::invalid_argument("eigenvector_scan: n_points must be odd and >= 5");
  if (!(max_rel_distance > 0.0))
    throw std::invalid_argument("eigenvector_scan: max_rel_distance must be positive");
  const double x0_norm = x0.x.norm();
  if (x0_norm == 0.0) throw std::invalid_argument("eigenvector_scan: x0 must be nonzero");

  ScanResult out;
  out.t.resize(n_points);
  std::vector<PulseShape> probes;
  probes.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    out.t[i] = -max_rel_distance + 2.0 * max_rel_distance * i / (n_points - 1);
    PulseShape p = x0;
    p.x += out.t[i] * x0_norm * v;
    probes.push_back(std::move(p));
  }
  const std::vector<double> vals = instrument.measure_batch(probes);
  out.j = Eigen::Map<const Eigen::VectorXd>(vals.data(), n_points);
  out.measurements_used = n_points;

  Eigen::MatrixXd vand(n_points, 3);
  for (int i = 0; i < n_points; ++i) vand.row(i) << out.t[i] * out.t[i], out.t[i], 1.0;
  const Eigen::Vector3d coef = vand.colPivHouseholderQr().solve(out.j);
  out.a = coef[0];
  out.b = coef[1];
  out.c = coef[2];

  const double ss_res = (vand * coef - out.j).squaredNorm();
  const double ss_tot = (out.j.array() - out.j.mean()).matrix().squaredNorm();
  out.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return out;
}

double relative_distance(const Eigen::VectorXd& x, const Eigen::VectorXd& x0) {
  const double base = x0.norm();
  if (base == 0.0) throw std::invalid_argument("relative_distance: x0 must be nonzero");
  return (x - x0).norm() / base;
}

}  // namespace rover

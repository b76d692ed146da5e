#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "rover/estimators.hpp"
#include "rover/rng.hpp"
#include "rover/spectra.hpp"
#include "rover/spin.hpp"

using namespace rover;

namespace {

Eigen::MatrixXd diag8(std::initializer_list<double> vals) {
  Eigen::VectorXd d(8);
  int i = 0;
  for (double v : vals) d[i++] = v;
  return d.asDiagonal();
}

// Largest principal angle between equal-dimension subspaces, in degrees.
double subspace_angle_deg(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
  const double c = std::min(1.0, svd.singularValues().minCoeff());
  return std::acos(c) * 180.0 / M_PI;
}

}  // namespace

TEST_CASE("two-threshold counting: flat band, curved band, and the gap between") {
  // Mimics the measured spectrum at the maximum: two strong negatives, six
  // nulls. Thresholds: null |l| <= 0.1*316 = 31.6, curved |l| > 0.3*316 = 94.8.
  const HessianSpectrum s = eigendecompose(diag8({-316, -150, 8, 3, 0, 0, -2, -25}));
  CHECK(s.null_tol == doctest::Approx(31.6).epsilon(1e-12));
  CHECK(s.neg_tol == doctest::Approx(94.8).epsilon(1e-12));
  CHECK(s.count_negative() == 2);
  CHECK(s.count_null() == 6);
  CHECK(s.count_positive() == 0);

  // An eigenvalue in the gap counts as neither flat nor curved.
  const HessianSpectrum g = eigendecompose(diag8({-316, -60, 0, 0, 0, 0, 0, 0}));
  CHECK(g.count_negative() == 1);
  CHECK(g.count_null() == 6);
  CHECK(g.count_positive() == 0);
}

TEST_CASE("eigendecompose sorts descending and fixes signs") {
  Eigen::MatrixXd h = diag8({1, -3, 0, 0, 0, 0, 0, 2});
  const HessianSpectrum s = eigendecompose(h);
  for (int i = 1; i < 8; ++i) CHECK(s.eigenvalues[i] <= s.eigenvalues[i - 1]);
  CHECK(s.eigenvalues[0] == doctest::Approx(2.0));
  CHECK(s.eigenvalues[7] == doctest::Approx(-3.0));
  for (int i = 0; i < 8; ++i) {
    int arg = 0;
    for (int r = 1; r < 8; ++r)
      if (std::abs(s.eigenvectors(r, i)) > std::abs(s.eigenvectors(arg, i))) arg = r;
    CHECK(s.eigenvectors(arg, i) > 0.0);
  }
  CHECK((s.eigenvectors * s.eigenvectors.transpose() - Eigen::MatrixXd::Identity(8, 8)).norm() <
        1e-12);
}

TEST_CASE("all-zero Hessian falls back to an absolute null band") {
  const HessianSpectrum s = eigendecompose(Eigen::MatrixXd::Zero(8, 8));
  CHECK(s.null_tol == 1e-12);
  CHECK(s.count_null() == 8);
  CHECK(s.count_negative() == 0);
  CHECK(classify_critical_point(s, 0.0, 1.0).label == "saddle");
  CHECK(null_space(s, 0.1).cols() == 8);
}

TEST_CASE("classification labels") {
  const HessianSpectrum max_like = eigendecompose(diag8({-316, -150, 0, 0, 0, 0, 0, 0}));
  CHECK(classify_critical_point(max_like, 0.0, 1.0).label == "max-like");
  CHECK(classify_critical_point(max_like, 2.0, 1.0).label == "non-critical");

  const HessianSpectrum min_like = eigendecompose(diag8({316, 150, 0, 0, 0, 0, 0, 0}));
  CHECK(classify_critical_point(min_like, 0.0, 1.0).label == "min-like");

  const HessianSpectrum saddle = eigendecompose(diag8({316, -316, 0, 0, 0, 0, 0, 0}));
  const CriticalVerdict v = classify_critical_point(saddle, 0.0, 1.0);
  CHECK(v.label == "saddle");
  CHECK(v.n_pos == 1);
  CHECK(v.n_neg == 1);
  CHECK(v.n_null == 6);
}

TEST_CASE("null_space returns an orthonormal basis of the flat directions") {
  const HessianSpectrum s = eigendecompose(diag8({-316, -150, 0, 0, 0, 0, 0, 0}));
  const Eigen::MatrixXd b = null_space(s, 0.1);
  REQUIRE(b.cols() == 6);
  CHECK((b.transpose() * b - Eigen::MatrixXd::Identity(6, 6)).norm() < 1e-12);
  // Flat directions carry no weight on the two curved axes (e0, e1).
  CHECK(b.row(0).norm() < 1e-12);
  CHECK(b.row(1).norm() < 1e-12);
}

TEST_CASE("measured Hessian at the optimum recovers the known topology") {
  SpinSystemParams p;
  const PulseShape opt = PulseShape::constant_y(37.0);
  const Eigen::MatrixXd analytic = analytic_hessian(opt, p);
  const Eigen::MatrixXd true_null = null_space(eigendecompose(analytic, 1e-6), 1e-6);
  REQUIRE(true_null.cols() == 6);

  for (uint64_t seed = 0; seed < 5; ++seed) {
    Spectrometer inst = make_spin_spectrometer(p, NoiseModel{1e-3, seed});
    const HessianEstimate est = hessian_least_squares(inst, opt, 500, 8.0);
    const HessianSpectrum s = eigendecompose(est.h);
    CHECK(s.count_negative() == 2);
    CHECK(s.count_null() == 6);
    const Eigen::MatrixXd b = null_space(s, 0.1);
    REQUIRE(b.cols() == 6);
    CHECK(subspace_angle_deg(true_null, b) < 15.0);
  }
}

TEST_CASE("noiseless scans along the curved directions fit clean parabolas") {
  SpinSystemParams p;
  const PulseShape opt = PulseShape::constant_y(37.0);
  const HessianSpectrum s = eigendecompose(analytic_hessian(opt, p), 1e-6);
  const double x0sq = opt.x.squaredNorm();

  for (int col : {6, 7}) {
    Spectrometer inst = make_spin_spectrometer(p, NoiseModel{});
    const ScanResult scan = eigenvector_scan(inst, opt, s.eigenvectors.col(col), 0.3, 13);
    CHECK(scan.a < 0.0);
    CHECK(scan.r_squared > 0.999);
    // J(t) = J0 + 0.5*lambda*(t*||x0||)^2 up to higher orders.
    CHECK(std::abs(2.0 * scan.a / x0sq - s.eigenvalues[col]) <
          0.2 * std::abs(s.eigenvalues[col]));
    CHECK(scan.measurements_used == 13);
  }
}

TEST_CASE("scan grid is symmetric and centered on x0") {
  SpinSystemParams p;
  const PulseShape opt = PulseShape::constant_y(37.0);
  Spectrometer inst = make_spin_spectrometer(p, NoiseModel{});
  Eigen::VectorXd v = Eigen::VectorXd::Zero(8);
  v[0] = 1.0;
  const ScanResult scan = eigenvector_scan(inst, opt, v, 0.3, 13);
  REQUIRE(scan.t.size() == 13);
  CHECK(scan.t[0] == doctest::Approx(-0.3));
  CHECK(scan.t[12] == doctest::Approx(0.3));
  CHECK(scan.t[6] == doctest::Approx(0.0));
  CHECK(scan.j[6] == doctest::Approx(objective(opt, p)).epsilon(1e-13));
}

TEST_CASE("scan input validation") {
  SpinSystemParams p;
  Spectrometer inst = make_spin_spectrometer(p, NoiseModel{});
  const PulseShape opt = PulseShape::constant_y(37.0);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(8);
  unit[3] = 1.0;
  CHECK_THROWS_AS(eigenvector_scan(inst, opt, 2.0 * unit, 0.3, 13), std::invalid_argument);
  CHECK_THROWS_AS(eigenvector_scan(inst, opt, unit, 0.3, 12), std::invalid_argument);
  CHECK_THROWS_AS(eigenvector_scan(inst, opt, unit, 0.3, 3), std::invalid_argument);
  CHECK_THROWS_AS(eigenvector_scan(inst, opt, unit, -0.1, 13), std::invalid_argument);
  CHECK_THROWS_AS(eigenvector_scan(inst, opt, Eigen::VectorXd::Ones(4), 0.3, 13),
                  std::invalid_argument);
  const PulseShape zero(Eigen::VectorXd::Zero(8));
  CHECK_THROWS_AS(eigenvector_scan(inst, zero, unit, 0.3, 13), std::invalid_argument);
}

TEST_CASE("eigendecompose input validation") {
  CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd::Zero(3, 4)), std::invalid_argument);
  Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(3, 3);
  asym(0, 1) = 1.0;
  CHECK_THROWS_AS(eigendecompose(asym), std::invalid_argument);
  CHECK_THROWS_AS(eigendecompose(Eigen::MatrixXd::Zero(3, 3), 0.1, 0.5), std::invalid_argument);
}

TEST_CASE("relative distance") {
  Eigen::VectorXd x0(2), x(2);
  x0 << 3, 4;
  x << 6, 8;
  CHECK(relative_distance(x, x0) == doctest::Approx(1.0));
  CHECK(relative_distance(x0, x0) == 0.0);
  CHECK_THROWS_AS(relative_distance(x, Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

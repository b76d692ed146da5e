#include "rover/estimators.hpp"

#include <Eigen/QR>
#include <cmath>

#include "rover/rng.hpp"

namespace rover {

GradientEstimate gradient_central_diff(Spectrometer& instrument, const PulseShape& x0,
                                       const Eigen::VectorXd& d) {
  x0.validate();
  const int dim = x0.dim();
  if (d.size() != dim)
    throw std::invalid_argument("gradient_central_diff: increment vector has wrong length");
  if ((d.array() <= 0.0).any())
    throw std::invalid_argument("gradient_central_diff: all increments must be positive");

  std::vector<PulseShape> probes;
  probes.reserve(2 * dim);
  for (int i = 0; i < dim; ++i) {
    PulseShape plus = x0, minus = x0;
    plus.x[i] += d[i];
    minus.x[i] -= d[i];
    probes.push_back(std::move(plus));
    probes.push_back(std::move(minus));
  }
  const std::vector<double> vals = instrument.measure_batch(probes);

  GradientEstimate est;
  est.g.resize(dim);
  est.d = d;
  est.measurements_used = 2 * dim;
  for (int i = 0; i < dim; ++i) est.g[i] = (vals[2 * i] - vals[2 * i + 1]) / (2.0 * d[i]);
  return est;
}

GradientEstimate gradient_central_diff(Spectrometer& instrument, const PulseShape& x0, double d) {
  return gradient_central_diff(instrument, x0, Eigen::VectorXd::Constant(x0.dim(), d));
}

double gradient_noise_floor(double sigma, int dim, double d) {
  return sigma * std::sqrt(static_cast<double>(dim)) / (std::sqrt(2.0) * d);
}

HessianEstimate hessian_least_squares(Spectrometer& instrument, const PulseShape& x0,
                                      int n_samples, double delta,
                                      std::optional<uint64_t> sampling_seed) {
  x0.validate();
  const int dim = x0.dim();
  const int n_hess = dim * (dim + 1) / 2;
  const int n_unknowns = dim + n_hess;
  if (n_samples < dim * (dim + 3) / 2)
    throw std::invalid_argument("hessian_least_squares: n_samples below D(D+3)/2");
  if (!(delta > 0.0)) throw std::invalid_argument("hessian_least_squares: delta must be positive");

  const uint64_t seed =
      sampling_seed ? *sampling_seed : rng::derive(instrument.noise().seed, instrument.ticks());

  const double j0 = instrument.measure(x0).value;

  std::vector<PulseShape> probes;
  probes.reserve(n_samples);
  Eigen::MatrixXd dx(n_samples, dim);
  for (int s = 0; s < n_samples; ++s) {
    PulseShape p = x0;
    for (int j = 0; j < dim; ++j) {
      dx(s, j) = rng::uniform_sym(seed, static_cast<uint64_t>(s) * dim + j, delta);
      p.x[j] += dx(s, j);
    }
    probes.push_back(std::move(p));
  }
  const std::vector<double> vals = instrument.measure_batch(probes);

  // Columns: D gradient entries, then h_ij for i <= j in row-major pair order.
  Eigen::MatrixXd design(n_samples, n_unknowns);
  Eigen::VectorXd rhs(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    rhs[s] = vals[s] - j0;
    int c = 0;
    for (int j = 0; j < dim; ++j) design(s, c++) = dx(s, j);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j)
        design(s, c++) = (i == j) ? 0.5 * dx(s, i) * dx(s, i) : dx(s, i) * dx(s, j);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < n_unknowns)
    throw std::runtime_error(
        "hessian_least_squares: rank-deficient design matrix (n_samples too small or delta "
        "degenerate)");
  const Eigen::VectorXd u = qr.solve(rhs);

  HessianEstimate est;
  est.g = u.head(dim);
  est.h = Eigen::MatrixXd::Zero(dim, dim);
  int c = dim;
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      est.h(i, j) = u[c];
      est.h(j, i) = u[c];
      ++c;
    }
  est.j0 = j0;
  est.n_samples = n_samples;
  est.delta = delta;
  est.residual_rms = (design * u - rhs).norm() / std::sqrt(static_cast<double>(n_samples));
  est.measurements_used = n_samples + 1;
  return est;
}

}  // namespace rover

#include "rover/outputs.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <stdexcept>

namespace rover {

std::string format_double(double v) { return fmt::format("{}", v); }

std::string csv_header(int dim) {
  std::string h = "iter,s,J,grad_norm,rel_distance,event";
  for (int i = 0; i < dim; ++i) h += fmt::format(",x{}", i);
  return h;
}

TrajectoryWriter::TrajectoryWriter(const std::string& path, int dim)
    : path_(path), out_(path, std::ios::trunc), dim_(dim) {
  if (!out_) throw std::runtime_error("cannot open \"" + path + "\" for writing");
  out_ << csv_header(dim) << '\n' << std::flush;
}

void TrajectoryWriter::write(const TrajectoryRecord& rec) {
  if (static_cast<int>(rec.x.size()) != dim_)
    throw std::invalid_argument("trajectory record dimension mismatch");
  out_ << rec.iter << ',' << format_double(rec.s) << ',' << format_double(rec.j) << ','
       << (rec.grad_norm ? format_double(*rec.grad_norm) : std::string()) << ','
       << format_double(rec.rel_distance) << ',' << rec.event;
  for (int i = 0; i < dim_; ++i) out_ << ',' << format_double(rec.x[i]);
  out_ << '\n' << std::flush;
}

nlohmann::json spectrum_to_json(const HessianSpectrum& spectrum, const CriticalVerdict& verdict) {
  std::vector<double> eigenvalues(spectrum.eigenvalues.data(),
                                  spectrum.eigenvalues.data() + spectrum.eigenvalues.size());
  std::vector<std::vector<double>> eigenvectors;
  for (long i = 0; i < spectrum.eigenvectors.cols(); ++i) {
    const auto col = spectrum.eigenvectors.col(i);
    eigenvectors.emplace_back(col.data(), col.data() + col.size());
  }
  return nlohmann::json{
      {"eigenvalues", eigenvalues},     {"eigenvectors", eigenvectors},
      {"null_tol", spectrum.null_tol}, {"neg_tol", spectrum.neg_tol},
      {"n_pos", verdict.n_pos},         {"n_neg", verdict.n_neg},
      {"n_null", verdict.n_null},       {"label", verdict.label},
  };
}

nlohmann::json hessian_estimate_to_json(const HessianEstimate& estimate) {
  std::vector<std::vector<double>> h;
  for (long i = 0; i < estimate.h.rows(); ++i) {
    h.emplace_back();
    for (long j = 0; j < estimate.h.cols(); ++j) h.back().push_back(estimate.h(i, j));
  }
  std::vector<double> g(estimate.g.data(), estimate.g.data() + estimate.g.size());
  return nlohmann::json{
      {"h", h},
      {"g", g},
      {"j0", estimate.j0},
      {"n_samples", estimate.n_samples},
      {"delta", estimate.delta},
      {"residual_rms", estimate.residual_rms},
      {"measurements_used", estimate.measurements_used},
  };
}

void write_scan_csv(const std::string& path, const ScanResult& scan) {
  std::string body = "t,J\n";
  for (long i = 0; i < scan.t.size(); ++i)
    body += format_double(scan.t[i]) + "," + format_double(scan.j[i]) + "\n";
  write_text_atomic(path, body);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open \"" + tmp + "\" for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("short write to \"" + tmp + "\"");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("cannot rename \"" + tmp + "\" to \"" + path + "\"");
}

void write_json_atomic(const std::string& path, const nlohmann::json& doc) {
  write_text_atomic(path, doc.dump(2) + "\n");
}

}  // namespace rover

#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "rover/drivers.hpp"
#include "rover/estimators.hpp"
#include "rover/spectra.hpp"

namespace rover {

/// Shortest round-trip decimal form; the single formatting used in every
/// text output so replays are byte-identical.
std::string format_double(double v);

/// Exact trajectory CSV header for a given control dimension.
std::string csv_header(int dim);

/// Streaming trajectory writer: header on open, one flushed line per record,
/// missing optionals as empty fields. Partial files stay valid CSV.
class TrajectoryWriter {
 public:
  TrajectoryWriter(const std::string& path, int dim);

  void write(const TrajectoryRecord& rec);
  const std::string& path() const { return path_; }

 private:
  std::string path_;
  std::ofstream out_;
  int dim_;
};

nlohmann::json spectrum_to_json(const HessianSpectrum& spectrum, const CriticalVerdict& verdict);
nlohmann::json hessian_estimate_to_json(const HessianEstimate& estimate);

/// Scan CSV: header "t,J", one row per grid point.
void write_scan_csv(const std::string& path, const ScanResult& scan);

/// Write-to-temp then rename, so readers never see a half-written file.
void write_text_atomic(const std::string& path, const std::string& content);
void write_json_atomic(const std::string& path, const nlohmann::json& doc);

}  // namespace rover

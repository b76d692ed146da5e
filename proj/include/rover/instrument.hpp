#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rover/pulse.hpp"

namespace rover {

/// Additive Gaussian measurement noise; every draw is keyed by (seed, tick).
struct NoiseModel {
  double sigma = 0.0;  // objective units
  uint64_t seed = 0;
  static constexpr const char* algorithm = "splitmix64-boxmuller";

  void validate() const {
    if (sigma < 0.0) throw std::invalid_argument("NoiseModel: sigma must be >= 0");
  }
};

struct Measurement {
  double value = 0.0;
  uint64_t pulse_id = 0;  // content hash of the measured pulse
  uint64_t tick = 0;
  double lab_time_cost = 0.0;  // seconds
};

struct RepeatedMeasurement {
  double mean = 0.0;
  double std = 0.0;  // unbiased sample std; 0 by convention when degenerate
  int n = 0;
  bool degenerate = false;  // n == 1, std not estimable
};

struct LabClock {
  uint64_t measurement_count = 0;
  std::optional<uint64_t> budget;
  double total_lab_time() const;  // seconds
};

class budget_exhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 64-bit content hash of a pulse (fields and duration).
uint64_t pulse_content_id(const PulseShape& pulse);

/// Virtual spectrometer: wraps a noiseless objective, adds seeded Gaussian
/// noise, and accounts simulated lab time (3 s per measurement) against an
/// optional measurement budget. One instance serializes one tick stream;
/// batch calls evaluate concurrently but draw noise by pre-assigned tick, so
/// parallel and serial results are bit-identical.
class Spectrometer {
 public:
  using Objective = std::function<double(const PulseShape&)>;

  static constexpr double seconds_per_measurement = 3.0;

  Spectrometer(Objective truth, NoiseModel noise,
               std::optional<uint64_t> budget = std::nullopt, bool parallel_batches = true);

  Measurement measure(const PulseShape& pulse);
  RepeatedMeasurement measure_repeated(const PulseShape& pulse, int n);

  /// Values for a batch of pulses, ticks assigned in order. OpenMP path.
  std::vector<double> measure_batch(const std::vector<PulseShape>& pulses);
  /// Reference implementation of measure_batch; identical output, no threading.
  std::vector<double> measure_batch_serial(const std::vector<PulseShape>& pulses);

  const LabClock& clock() const { return clock_; }
  const NoiseModel& noise() const { return noise_; }
  uint64_t ticks() const { return clock_.measurement_count; }

 private:
  double value_at(const PulseShape& pulse, uint64_t tick) const;
  void charge(uint64_t n) const;  // throws budget_exhausted before consuming

  Objective truth_;
  NoiseModel noise_;
  LabClock clock_;
  bool parallel_;
};

/// Spectrometer over the spin objective with the given system parameters.
Spectrometer make_spin_spectrometer(const SpinSystemParams& params, NoiseModel noise,
                                    std::optional<uint64_t> budget = std::nullopt,
                                    bool parallel_batches = true);

}  // namespace rover

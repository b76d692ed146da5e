#include "rover/instrument.hpp"

#include <cmath>
#include <cstring>

#include "rover/rng.hpp"
#include "rover/spin.hpp"

namespace rover {

double LabClock::total_lab_time() const {
  return Spectrometer::seconds_per_measurement * static_cast<double>(measurement_count);
}

uint64_t pulse_content_id(const PulseShape& pulse) {
  uint64_t h = rng::mix(static_cast<uint64_t>(pulse.x.size()));
  auto fold = [&h](double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = rng::mix(h ^ bits);
  };
  for (int i = 0; i < pulse.x.size(); ++i) fold(pulse.x[i]);
  fold(pulse.total_time);
  return h;
}

Spectrometer::Spectrometer(Objective truth, NoiseModel noise, std::optional<uint64_t> budget,
                           bool parallel_batches)
    : truth_(std::move(truth)), noise_(noise), parallel_(parallel_batches) {
  noise_.validate();
  if (!truth_) throw std::invalid_argument("Spectrometer: objective must be callable");
  clock_.budget = budget;
}

void Spectrometer::charge(uint64_t n) const {
  if (clock_.budget && clock_.measurement_count + n > *clock_.budget)
    throw budget_exhausted("measurement budget exhausted (" +
                           std::to_string(*clock_.budget) + " allowed)");
}

double Spectrometer::value_at(const PulseShape& pulse, uint64_t tick) const {
  return truth_(pulse) + noise_.sigma * rng::gaussian(noise_.seed, tick);
}

Measurement Spectrometer::measure(const PulseShape& pulse) {
  charge(1);
  const uint64_t tick = clock_.measurement_count++;
  return {value_at(pulse, tick), pulse_content_id(pulse), tick, seconds_per_measurement};
}

RepeatedMeasurement Spectrometer::measure_repeated(const PulseShape& pulse, int n) {
  if (n < 1) throw std::invalid_argument("measure_repeated: n must be >= 1");
  charge(static_cast<uint64_t>(n));
  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = value_at(pulse, clock_.measurement_count++);

  RepeatedMeasurement out;
  out.n = n;
  out.degenerate = (n == 1);
  double sum = 0.0;
  for (double v : vals) sum += v;
  out.mean = sum / n;
  if (n > 1) {
    double ss = 0.0;
    for (double v : vals) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1));
  }
  return out;
}

std::vector<double> Spectrometer::measure_batch(const std::vector<PulseShape>& pulses) {
  charge(pulses.size());
  const uint64_t t0 = clock_.measurement_count;
  const int n = static_cast<int>(pulses.size());
  std::vector<double> out(pulses.size());
  if (parallel_) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[i] = value_at(pulses[i], t0 + i);
  } else {
    for (int i = 0; i < n; ++i) out[i] = value_at(pulses[i], t0 + i);
  }
  clock_.measurement_count += pulses.size();
  return out;
}

std::vector<double> Spectrometer::measure_batch_serial(const std::vector<PulseShape>& pulses) {
  charge(pulses.size());
  const uint64_t t0 = clock_.measurement_count;
  std::vector<double> out(pulses.size());
  for (size_t i = 0; i < pulses.size(); ++i) out[i] = value_at(pulses[i], t0 + i);
  clock_.measurement_count += pulses.size();
  return out;
}

Spectrometer make_spin_spectrometer(const SpinSystemParams& params, NoiseModel noise,
                                    std::optional<uint64_t> budget, bool parallel_batches) {
  params.validate();
  return Spectrometer([params](const PulseShape& p) { return objective(p, params); }, noise,
                      budget, parallel_batches);
}

}  // namespace rover

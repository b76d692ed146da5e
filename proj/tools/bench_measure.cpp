#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rover/drivers.hpp"
#include "rover/instrument.hpp"
#include "rover/rng.hpp"

using namespace rover;

namespace {

double best_of(int reps, const std::function<void()>& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const int batch = argc > 1 ? std::atoi(argv[1]) : 4000;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 5;

  SpinSystemParams params;
  NoiseModel noise;
  noise.sigma = 1e-3;
  noise.seed = 1;

  std::vector<PulseShape> pulses;
  pulses.reserve(batch);
  for (int i = 0; i < batch; ++i)
    pulses.push_back(random_start(rng::derive(7, static_cast<uint64_t>(i))));

  Spectrometer a = make_spin_spectrometer(params, noise);
  Spectrometer b = make_spin_spectrometer(params, noise);
  const std::vector<double> va = a.measure_batch(pulses);
  const std::vector<double> vb = b.measure_batch_serial(pulses);
  if (va.size() != vb.size() ||
      std::memcmp(va.data(), vb.data(), va.size() * sizeof(double)) != 0) {
    fmt::print("parallel and serial batches DIFFER\n");
    return 1;
  }
  fmt::print("parallel and serial batches are bit-identical ({} pulses)\n", batch);

  Spectrometer par = make_spin_spectrometer(params, noise);
  Spectrometer ser = make_spin_spectrometer(params, noise);
  const double t_par = best_of(reps, [&] { par.measure_batch(pulses); });
  const double t_ser = best_of(reps, [&] { ser.measure_batch_serial(pulses); });

#ifdef _OPENMP
  fmt::print("threads: {}\n", omp_get_max_threads());
#else
  fmt::print("threads: 1 (built without OpenMP)\n");
#endif
  fmt::print("measure_batch        : {:8.3f} ms (best of {})\n", t_par, reps);
  fmt::print("measure_batch_serial : {:8.3f} ms (best of {})\n", t_ser, reps);
  fmt::print("speedup              : {:.2f}x\n", t_ser / t_par);
  return 0;
}

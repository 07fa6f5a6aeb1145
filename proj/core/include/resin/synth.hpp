#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "resin/signal.hpp"

namespace resin::synth {

// Known phasic/tonic split behind a generated signal; the oracle for
// decomposition tests.
struct GroundTruth {
  std::vector<std::size_t> driver_times;   // sample indices of events
  std::vector<double> driver_amplitudes;   // positive
  std::vector<double> tonic_true;
  std::vector<double> phasic_true;         // conv(sparse driver, kernel), >= 0
  double noise_sigma = 0.0;
};

// Biexponential impulse shape exp(-t/tau1) - exp(-t/tau0), peak-normalized.
// k[0] = 0 and the curve is nonnegative and unimodal for 0 < tau0 < tau1.
std::vector<double> bateman_kernel(double tau0, double tau1, double delta,
                                   std::size_t length);

struct GenConfig {
  double duration_s = 60.0;
  double rate_hz = 50.0;
  std::size_t n_events = 3;
  double amp_min = 0.3;
  double amp_max = 1.0;
  double tonic_knot_spacing_s = 10.0;  // >= 10 s keeps the baseline smooth
  double noise_sigma = 0.01;
  double tau0 = 0.7;
  double tau1 = 2.0;
};

std::pair<EdaSignal, GroundTruth> generate(const GenConfig& config,
                                           std::uint64_t seed);

void write_ground_truth_csv(const std::string& path, const GroundTruth& gt);

}  // namespace resin::synth

#include "resin/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include "resin/csv.hpp"

namespace resin::synth {

std::vector<double> bateman_kernel(double tau0, double tau1, double delta,
                                   std::size_t length) {
  if (!(tau0 > 0.0 && tau0 < tau1))
    throw std::invalid_argument("bateman_kernel requires 0 < tau0 < tau1");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  std::vector<double> k(length);
  double peak = 0.0;
  for (std::size_t i = 0; i < length; ++i) {
    double t = static_cast<double>(i) * delta;
    k[i] = std::exp(-t / tau1) - std::exp(-t / tau0);
    peak = std::max(peak, k[i]);
  }
  if (peak > 0.0)
    for (double& v : k) v /= peak;
  return k;
}

namespace {

// C1 interpolation between knot values (cosine easing per segment).
double smooth_interp(const std::vector<double>& knots, double pos) {
  auto seg = static_cast<std::size_t>(pos);
  if (seg + 1 >= knots.size()) return knots.back();
  double frac = pos - static_cast<double>(seg);
  double w = 0.5 - 0.5 * std::cos(std::numbers::pi * frac);
  return knots[seg] * (1.0 - w) + knots[seg + 1] * w;
}

}  // namespace

std::pair<EdaSignal, GroundTruth> generate(const GenConfig& config,
                                           std::uint64_t seed) {
  if (config.duration_s < 1.0)
    throw std::invalid_argument("duration must be >= 1 s");
  const auto n = static_cast<std::size_t>(
      std::llround(config.duration_s * config.rate_hz));
  const double delta = 1.0 / config.rate_hz;
  std::mt19937_64 rng(seed);

  GroundTruth gt;
  gt.noise_sigma = config.noise_sigma;

  // Baseline: random smooth spline through widely spaced knots plus drift.
  const auto knot_samples = static_cast<std::size_t>(
      std::llround(config.tonic_knot_spacing_s * config.rate_hz));
  std::size_t n_knots = n / knot_samples + 2;
  std::uniform_real_distribution<double> knot_dist(-0.3, 0.3);
  std::vector<double> knots(n_knots);
  for (double& v : knots) v = 2.0 + knot_dist(rng);
  std::uniform_real_distribution<double> slope_dist(-0.2, 0.2);
  double drift_per_s = slope_dist(rng);
  gt.tonic_true.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double pos = static_cast<double>(i) / static_cast<double>(knot_samples);
    gt.tonic_true[i] = smooth_interp(knots, pos) +
                       drift_per_s * static_cast<double>(i) * delta;
  }

  // Events: keep them away from the edges so the full SCR shape is visible.
  gt.phasic_true.assign(n, 0.0);
  if (config.n_events > 0) {
    auto kernel = bateman_kernel(config.tau0, config.tau1, delta,
                                 std::min<std::size_t>(n, static_cast<std::size_t>(
                                     10.0 * config.rate_hz)));
    double lo = 2.0 * config.rate_hz;
    double hi = std::max(lo + 1.0, static_cast<double>(n) - 10.0 * config.rate_hz);
    std::uniform_real_distribution<double> time_dist(lo, hi);
    std::uniform_real_distribution<double> amp_dist(config.amp_min,
                                                    config.amp_max);
    std::vector<std::size_t> times(config.n_events);
    for (auto& t : times) t = static_cast<std::size_t>(time_dist(rng));
    std::sort(times.begin(), times.end());
    // Enforce >= 2 s separation so recovered peaks are attributable.
    for (std::size_t i = 1; i < times.size(); ++i)
      times[i] = std::max(times[i], times[i - 1] +
                                        static_cast<std::size_t>(
                                            2.0 * config.rate_hz));
    for (std::size_t t : times) {
      if (t >= n) continue;
      double amp = amp_dist(rng);
      gt.driver_times.push_back(t);
      gt.driver_amplitudes.push_back(amp);
      for (std::size_t j = 0; j < kernel.size() && t + j < n; ++j)
        gt.phasic_true[t + j] += amp * kernel[j];
    }
  }

  EdaSignal sig;
  sig.subject_id = "synth";
  sig.song_id = "s" + std::to_string(seed);
  sig.sample_rate_hz = config.rate_hz;
  sig.samples.resize(n);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    double eps = config.noise_sigma > 0.0 ? config.noise_sigma * noise(rng) : 0.0;
    sig.samples[i] = gt.tonic_true[i] + gt.phasic_true[i] + eps;
  }
  return {std::move(sig), std::move(gt)};
}

void write_ground_truth_csv(const std::string& path, const GroundTruth& gt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "sample_index,tonic,phasic\n";
  for (std::size_t i = 0; i < gt.tonic_true.size(); ++i)
    out << i << ',' << csv::format_double(gt.tonic_true[i]) << ','
        << csv::format_double(gt.phasic_true[i]) << "\n";
}

}  // namespace resin::synth

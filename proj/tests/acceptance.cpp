// Acceptance gate: one pass/fail line per criterion, exit 0 iff all
// gating criteria hold.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "resin/cvxeda.hpp"
#include "resin/gradcheck.hpp"
#include "resin/harness.hpp"
#include "resin/labeling.hpp"
#include "resin/metrics.hpp"
#include "resin/nn.hpp"
#include "resin/qp.hpp"
#include "resin/synth.hpp"
#include "test_util.hpp"

using namespace resin;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
  if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd x = a.array() - a.mean();
  Eigen::VectorXd y = b.array() - b.mean();
  double denom = std::sqrt(x.squaredNorm() * y.squaredNorm());
  return denom > 0 ? x.dot(y) / denom : 0.0;
}

// ---------------------------------------------------------------- criteria

void qp_oracle_equivalence() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> size_dist(2, 20);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst_obj = 0.0, worst_kkt = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    int n = size_dist(rng), m = size_dist(rng);
    Eigen::MatrixXd R(n, n), G(m, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) R(i, j) = gauss(rng);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) G(i, j) = gauss(rng);
    qp::QpProblem p;
    p.P = Eigen::SparseMatrix<double>(
        (R.transpose() * R + 0.05 * Eigen::MatrixXd::Identity(n, n))
            .sparseView());
    p.q = Eigen::VectorXd::NullaryExpr(n,
                                       [&](Eigen::Index) { return gauss(rng); });
    p.G = G.sparseView();
    Eigen::VectorXd x0 = Eigen::VectorXd::NullaryExpr(
        n, [&](Eigen::Index) { return gauss(rng); });
    Eigen::VectorXd gx = G * x0;
    p.lower = gx.array() - 0.5;
    p.upper = gx.array() + 0.5;

    auto admm = qp::solve_qp(p);
    auto ref = qp::solve_qp_reference(p);
    if (admm.status != qp::QpStatus::solved ||
        ref.status != qp::QpStatus::solved) {
      report("qp_oracle_equivalence", false,
             "solver failure on trial " + std::to_string(trial));
      return;
    }
    worst_obj = std::max(worst_obj, std::abs(admm.objective - ref.objective));
    auto kkt = qp::kkt_residuals(p, admm);
    worst_kkt = std::max({worst_kkt, kkt.primal, kkt.dual});
  }
  double dt = seconds_since(t0);
  bool ok = worst_obj <= 1e-6 && worst_kkt <= 1e-6 && dt < 30.0;
  report("qp_oracle_equivalence", ok,
         "100 problems, max |obj_admm - obj_ref| = " +
             std::to_string(worst_obj) + ", max KKT residual = " +
             std::to_string(worst_kkt) + ", " + std::to_string(dt) + " s");
}

void decomposition_recovery() {
  auto t0 = Clock::now();
  synth::GenConfig cfg;
  cfg.duration_s = 60.0;
  cfg.n_events = 3;
  cfg.noise_sigma = 0.01;
  cvxeda::Decomposer decomposer;

  int events_total = 0, events_hit = 0;
  std::vector<double> correlations;
  double worst_rms = 0.0, worst_min_p = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    auto [signal, gt] = synth::generate(cfg, seed);
    auto d = decomposer(signal);
    double global_max = d.driver.maxCoeff();
    for (std::size_t e = 0; e < gt.driver_times.size(); ++e) {
      ++events_total;
      auto t = static_cast<Eigen::Index>(gt.driver_times[e]);
      double near = 0.0;
      for (Eigen::Index i = std::max<Eigen::Index>(0, t - 25);
           i <= std::min<Eigen::Index>(d.driver.size() - 1, t + 25); ++i)
        near = std::max(near, d.driver[i]);
      if (near >= 0.05 * global_max) ++events_hit;
    }
    Eigen::VectorXd truth = Eigen::Map<const Eigen::VectorXd>(
        gt.phasic_true.data(), static_cast<Eigen::Index>(gt.phasic_true.size()));
    correlations.push_back(pearson(truth, d.phasic));
    double rms = std::sqrt(d.residual.squaredNorm() /
                           static_cast<double>(d.residual.size()));
    worst_rms = std::max(worst_rms, rms);
    worst_min_p = std::min(worst_min_p, d.driver.minCoeff());
  }
  std::sort(correlations.begin(), correlations.end());
  double median_r = correlations[correlations.size() / 2];
  double hit_rate =
      static_cast<double>(events_hit) / static_cast<double>(events_total);
  double dt = seconds_since(t0);
  bool ok = hit_rate >= 0.95 && median_r >= 0.9 &&
            worst_rms <= 2.0 * cfg.noise_sigma && worst_min_p >= -1e-8 &&
            dt < 120.0;
  report("decomposition_recovery", ok,
         "50 signals: event hit rate " + std::to_string(hit_rate) +
             ", median pearson " + std::to_string(median_r) + ", max RMS(eps) " +
             std::to_string(worst_rms) + ", min(p) " +
             std::to_string(worst_min_p) + ", " + std::to_string(dt) + " s");
}

void decomposition_invariants() {
  synth::GenConfig cfg;
  cfg.duration_s = 20.0;
  cvxeda::Decomposer decomposer;
  double worst_add = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    auto [signal, gt] = synth::generate(cfg, seed);
    auto d = decomposer(signal);
    for (Eigen::Index i = 0; i < d.phasic.size(); ++i)
      worst_add = std::max(
          worst_add, std::abs(signal.samples[static_cast<std::size_t>(i)] -
                              d.phasic[i] - d.tonic[i] - d.residual[i]));

    cvxeda::DecomposeParams more_alpha;
    more_alpha.alpha *= 10.0;
    auto da = cvxeda::decompose(signal, more_alpha);
    if (da.driver.lpNorm<1>() > d.driver.lpNorm<1>() + 1e-8) monotone = false;

    cvxeda::DecomposeParams more_gamma;
    more_gamma.gamma *= 10.0;
    auto dg = cvxeda::decompose(signal, more_gamma);
    if (dg.spline_weights.norm() > d.spline_weights.norm() + 1e-8)
      monotone = false;
  }
  bool ok = worst_add <= 1e-10 && monotone;
  report("decomposition_invariants", ok,
         "10 signals: max additivity violation " + std::to_string(worst_add) +
             ", alpha/gamma monotone " + (monotone ? "yes" : "no"));
}

void labeling_oracle() {
  std::mt19937_64 rng(321);
  std::uniform_int_distribution<int> n_dist(2, 10);
  std::uniform_real_distribution<double> v_dist(0.0, 1.0);
  bool match = true;
  for (int trial = 0; trial < 200 && match; ++trial) {
    std::vector<double> values(static_cast<std::size_t>(n_dist(rng)));
    for (double& v : values) v = v_dist(rng);
    auto fast = labeling::two_means_1d(values);

    // Exhaustive 2-partition brute force.
    const std::size_t n = values.size();
    double best_cost = std::numeric_limits<double>::infinity();
    double best_lo = 0, best_hi = 0;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      double s0 = 0, s1 = 0;
      int n0 = 0, n1 = 0;
      for (std::size_t i = 0; i < n; ++i)
        (mask & (1u << i)) ? (s1 += values[i], ++n1) : (s0 += values[i], ++n0);
      double m0 = s0 / n0, m1 = s1 / n1, cost = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double m = (mask & (1u << i)) ? m1 : m0;
        cost += (values[i] - m) * (values[i] - m);
      }
      if (cost < best_cost - 1e-12) {
        best_cost = cost;
        best_lo = std::min(m0, m1);
        best_hi = std::max(m0, m1);
      }
    }
    if (fast.degenerate || std::abs(fast.c_low - best_lo) > 1e-10 ||
        std::abs(fast.c_high - best_hi) > 1e-10)
      match = false;
  }

  auto fig2 = labeling::two_means_1d({0.2, 0.3, 0.8, 0.9});
  double threshold = 0.5 * (fig2.c_low + fig2.c_high);
  bool fig2_ok = std::abs(threshold - 0.55) <= 1e-12 &&
                 fig2.assignment == std::vector<int>{0, 0, 1, 1};
  report("labeling_oracle", match && fig2_ok,
         std::string("200 brute-force matches ") + (match ? "yes" : "no") +
             ", Fig-2 threshold " + std::to_string(threshold) + " labels " +
             (fig2_ok ? "(0,0,1,1)" : "mismatch"));
}

void imaging_criteria() {
  // Lossless rearrangement.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> x(500);
  for (double& v : x) v = dist(rng);
  auto m = imaging::signal_to_matrix(x);
  bool lossless = true;
  for (int t = 0; t < m.rows() && lossless; ++t)
    for (int s = 0; s < 50; ++s)
      if (m(t, s) != x[static_cast<std::size_t>(t * 50 + s)]) lossless = false;

  // Identity resize is exact.
  auto same = imaging::bilinear_resize(m, static_cast<int>(m.rows()),
                                       static_cast<int>(m.cols()));
  bool identity = (same - m).cwiseAbs().maxCoeff() == 0.0;

  // Round trip on a smooth channel keeps the curve shape.
  synth::GenConfig cfg;
  cfg.duration_s = 40.0;
  cfg.noise_sigma = 0.0;
  auto [signal, gt] = synth::generate(cfg, 77);
  auto norm = imaging::minmax_normalize(signal.samples);
  auto mat = imaging::signal_to_matrix(norm);
  auto up = imaging::bilinear_resize(mat, 224, 224);
  auto back = imaging::bilinear_resize(up, static_cast<int>(mat.rows()), 50);
  Eigen::Map<Eigen::VectorXd> a(mat.data(), mat.size());
  Eigen::Map<Eigen::VectorXd> b(back.data(), back.size());
  double r = pearson(a, b);

  bool ok = lossless && identity && r >= 0.99;
  report("imaging", ok,
         std::string("rearrangement lossless ") + (lossless ? "yes" : "no") +
             ", identity resize exact " + (identity ? "yes" : "no") +
             ", round-trip pearson " + std::to_string(r));
}

void gradient_suite() {
  auto t0 = Clock::now();
  auto results = nn::gradient_check_suite(2026);
  double worst = 0.0;
  for (const auto& r : results) worst = std::max(worst, r.max_rel_error);
  double dt = seconds_since(t0);
  bool ok = worst <= 1e-4 && dt < 120.0;
  report("gradient_suite", ok,
         std::to_string(results.size()) + " checks, max rel error " +
             std::to_string(worst) + ", " + std::to_string(dt) + " s");
}

std::vector<nn::NnSample> overfit_samples(int n, int music_dim,
                                          bool music_signal,
                                          std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.2);
  std::vector<nn::NnSample> samples;
  for (int i = 0; i < n; ++i) {
    nn::NnSample s;
    s.label = i % 2;
    double level = s.label == 0 ? -0.4 : 0.4;
    for (int c = 0; c < 3; ++c) {
      imaging::Matrix img(imaging::kImageSize, imaging::kImageSize);
      for (int y = 0; y < img.rows(); ++y)
        for (int x = 0; x < img.cols(); ++x) img(y, x) = level + noise(rng);
      s.base[static_cast<std::size_t>(c)] = std::move(img);
    }
    s.music = Eigen::VectorXd::Zero(music_dim);
    if (music_signal) s.music[0] = level + 0.1 * noise(rng);
    samples.push_back(std::move(s));
  }
  return samples;
}

int training_accuracy(nn::Model& model, const std::vector<nn::NnSample>& s) {
  int correct = 0;
  for (const auto& sample : s)
    if (nn::predict(model, sample).label == sample.label) ++correct;
  return correct;
}

void overfit_sanity() {
  nn::TrainConfig schedule_probe;
  bool lr_ok =
      nn::learning_rate_at(schedule_probe, 0) == 0.001 &&
      std::abs(nn::learning_rate_at(schedule_probe, 300) - 1e-4) < 1e-18 &&
      std::abs(nn::learning_rate_at(schedule_probe, 600) - 1e-5) < 1e-19;

  nn::ResSiConfig tiny;
  tiny.stage_channels = {4, 8, 16, 32};
  tiny.blocks_per_stage = 1;
  auto samples = overfit_samples(20, 4, false, 33);
  nn::Model model = nn::make_model(tiny, 4, 16, true, false, 17);
  nn::TrainConfig tc;
  tc.batch_size = 20;
  tc.seed = 17;
  tc.augment = false;
  tc.lr0 = 0.01;  // overfit run; the paper schedule is asserted separately
  int iters_used = 0;
  bool reached = false;
  while (iters_used < 500 && !reached) {
    tc.max_iters = 25;
    nn::train(model, samples, tc);
    iters_used += 25;
    reached = training_accuracy(model, samples) == 20;
  }
  report("overfit_sanity", reached && lr_ok,
         std::string("100% training accuracy ") +
             (reached ? "reached by iteration " + std::to_string(iters_used)
                      : "not reached in 500 iterations") +
             ", lr schedule 1e-3/1e-4/1e-5 " + (lr_ok ? "verified" : "wrong"));
}

double smoothed_final_loss(const std::vector<nn::LossPoint>& curve) {
  if (curve.empty()) return std::numeric_limits<double>::infinity();
  std::size_t window = std::min<std::size_t>(20, curve.size());
  double sum = 0.0;
  for (std::size_t i = curve.size() - window; i < curve.size(); ++i)
    sum += curve[i].loss;
  return sum / static_cast<double>(window);
}

harness::ExperimentConfig corpus_config(const testutil::TempDir& tmp) {
  harness::ExperimentConfig c;
  c.eda_path = tmp.file("eda.csv");
  c.annotations_path = tmp.file("annotations.csv");
  c.music_features_path = tmp.file("music_features.csv");
  c.output_dir = tmp.dir();
  c.net.stage_channels = {4, 8, 16, 32};
  c.net.blocks_per_stage = 1;
  c.head_hidden = 16;
  c.synth.duration_s = 12.0;
  c.synth.music_dim = 6;
  return c;
}

void write_corpus(const harness::ExperimentConfig& c) {
  auto corpus = harness::make_synth_corpus(c.synth, c.seed);
  write_eda_csv(c.eda_path, corpus.signals);
  write_annotations(c.annotations_path, corpus.annotations);
  write_music_features(c.music_features_path, corpus.music);
}

void fusion_benefit() {
  testutil::TempDir tmp;
  auto c = corpus_config(tmp);
  c.folds = 2;
  c.seed = 2;
  c.net.stage_channels = {2, 3, 4, 5};
  c.train.batch_size = 8;
  c.train.max_iters = 60;
  c.train.lr0 = 0.01;
  c.synth.n_subjects = 8;
  c.synth.n_songs = 4;
  c.synth.music_signal = 2.0;
  write_corpus(c);
  auto data = harness::prepare(c);

  c.feature_mode = "fusion";
  auto fusion = harness::run_cv(c, data);
  c.feature_mode = "eda_only";
  auto eda_only = harness::run_cv(c, data);

  double acc_fusion =
      0.5 * (fusion.mean.valence.accuracy + fusion.mean.arousal.accuracy);
  double acc_eda =
      0.5 * (eda_only.mean.valence.accuracy + eda_only.mean.arousal.accuracy);
  double loss_fusion = smoothed_final_loss(fusion.last_loss_curve);
  double loss_eda = smoothed_final_loss(eda_only.last_loss_curve);
  bool ok = fusion.fold_errors.empty() && eda_only.fold_errors.empty() &&
            acc_fusion >= acc_eda && loss_fusion <= loss_eda;
  report("fusion_benefit", ok,
         "accuracy fusion " + std::to_string(acc_fusion) + " vs eda_only " +
             std::to_string(acc_eda) + ", smoothed final loss " +
             std::to_string(loss_fusion) + " vs " + std::to_string(loss_eda));
}

void harness_determinism() {
  auto t0 = Clock::now();
  testutil::TempDir tmp;
  auto c = corpus_config(tmp);
  c.folds = 10;
  c.seed = 7;
  c.net.stage_channels = {2, 3, 4, 5};
  c.head_hidden = 8;
  c.train.batch_size = 6;
  c.train.max_iters = 3;
  c.synth.n_subjects = 10;
  c.synth.n_songs = 2;
  write_corpus(c);

  auto run = [&]() {
    auto data = harness::prepare(c);
    auto report_obj = harness::run_cv(c, data);
    return std::pair{harness::report_to_json(c, report_obj).dump(2),
                     report_obj.audit_ok && report_obj.fold_errors.empty()};
  };
  auto [r1, ok1] = run();
  auto [r2, ok2] = run();
  double dt = seconds_since(t0);
  bool ok = r1 == r2 && ok1 && ok2 && dt < 600.0;
  report("harness_determinism", ok,
         std::string("10-fold reports byte-identical ") +
             (r1 == r2 ? "yes" : "no") + ", leakage audit " +
             (ok1 && ok2 ? "passed" : "failed") + ", " + std::to_string(dt) +
             " s");
}

void pmemo_informational() {
  const char* cfg_path = std::getenv("RESIN_PMEMO_CONFIG");
  if (cfg_path == nullptr) {
    std::cout << "[INFO] pmemo_comparison: skipped (set RESIN_PMEMO_CONFIG to "
                 "a config pointing at the dataset); reference rows mix+fusion "
                 "arousal 73.65% / valence 73.43%, advisory band +-5 points\n";
    return;
  }
  try {
    auto config = harness::load_config(cfg_path);
    auto data = harness::prepare(config);
    auto rep = harness::run_cv(config, data);
    double va = 100.0 * rep.mean.valence.accuracy;
    double aa = 100.0 * rep.mean.arousal.accuracy;
    std::cout << "[INFO] pmemo_comparison: valence " << va << "% (ref 73.43), "
              << "arousal " << aa << "% (ref 73.65); deviations"
              << (std::abs(va - 73.43) <= 5.0 && std::abs(aa - 73.65) <= 5.0
                      ? " inside"
                      : " outside")
              << " the +-5 point advisory band (non-gating)\n";
  } catch (const std::exception& e) {
    std::cout << "[INFO] pmemo_comparison: run failed (non-gating): "
              << e.what() << "\n";
  }
}

}  // namespace

void guarded(int argc, char** argv, const char* name, void (*criterion)()) {
  if (argc > 1) {  // optional name filter for running a subset
    bool selected = false;
    for (int i = 1; i < argc; ++i)
      if (std::string(argv[i]) == name) selected = true;
    if (!selected) return;
  }
  try {
    criterion();
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

int main(int argc, char** argv) {
  guarded(argc, argv, "qp_oracle_equivalence", qp_oracle_equivalence);
  guarded(argc, argv, "decomposition_recovery", decomposition_recovery);
  guarded(argc, argv, "decomposition_invariants", decomposition_invariants);
  guarded(argc, argv, "labeling_oracle", labeling_oracle);
  guarded(argc, argv, "imaging", imaging_criteria);
  guarded(argc, argv, "gradient_suite", gradient_suite);
  guarded(argc, argv, "overfit_sanity", overfit_sanity);
  guarded(argc, argv, "fusion_benefit", fusion_benefit);
  guarded(argc, argv, "harness_determinism", harness_determinism);
  guarded(argc, argv, "pmemo_comparison", pmemo_informational);
  std::cout << (g_failures == 0 ? "ALL ACCEPTANCE CRITERIA PASSED\n"
                                : std::to_string(g_failures) +
                                      " ACCEPTANCE CRITERIA FAILED\n");
  return g_failures == 0 ? 0 : 1;
}

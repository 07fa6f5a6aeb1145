#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "resin/csv.hpp"
#include "resin/cvxeda.hpp"
#include "resin/errors.hpp"
#include "resin/gradcheck.hpp"
#include "resin/harness.hpp"
#include "resin/labeling.hpp"
#include "resin/metrics.hpp"
#include "resin/nn.hpp"
#include "resin/signal.hpp"
#include "resin/synth.hpp"

namespace fs = std::filesystem;
using namespace resin;

namespace {

struct CliOptions {
  std::string config_path;
  std::string command;
  bool seed_set = false;
  std::uint64_t seed = 0;
  std::string channel_mode;
  std::string feature_mode;
};

harness::ExperimentConfig load_effective_config(const CliOptions& opts) {
  harness::ExperimentConfig config = harness::load_config(opts.config_path);
  if (opts.seed_set) config.seed = opts.seed;
  if (!opts.channel_mode.empty()) config.channel_mode = opts.channel_mode;
  if (!opts.feature_mode.empty()) config.feature_mode = opts.feature_mode;
  return config;
}

std::string pair_stem(const std::string& subject, const std::string& song) {
  return subject + "_" + song;
}

int cmd_synth(const harness::ExperimentConfig& config) {
  auto corpus = harness::make_synth_corpus(config.synth, config.seed);
  fs::create_directories(config.output_dir);
  fs::create_directories(config.output_dir + "/ground_truth");
  write_eda_csv(config.output_dir + "/eda.csv", corpus.signals);
  write_annotations(config.output_dir + "/annotations.csv",
                    corpus.annotations);
  write_music_features(config.output_dir + "/music_features.csv",
                       corpus.music);
  for (const auto& [key, gt] : corpus.ground_truth)
    synth::write_ground_truth_csv(config.output_dir + "/ground_truth/" +
                                      pair_stem(key.first, key.second) +
                                      ".csv",
                                  gt);
  std::cout << "wrote " << corpus.signals.size() << " signals to "
            << config.output_dir << "\n";
  return 0;
}

int cmd_decompose(const harness::ExperimentConfig& config) {
  auto signals = load_eda_csv(config.eda_path);
  if (config.trim_lead_s > 0.0)
    for (auto& s : signals) s = trim_lead(s, config.trim_lead_s);
  fs::create_directories(config.output_dir + "/decompositions");
  cvxeda::Decomposer decomposer(config.cvxeda);
  for (const auto& signal : signals) {
    auto d = decomposer(signal);
    cvxeda::write_decomposition_csv(
        config.output_dir + "/decompositions/" +
            pair_stem(signal.subject_id, signal.song_id) + ".csv",
        signal, d);
  }
  std::cout << "decomposed " << signals.size() << " signals\n";
  return 0;
}

int cmd_label(const harness::ExperimentConfig& config) {
  auto annotations = load_annotations(config.annotations_path);
  auto thresholds = labeling::all_thresholds(annotations);
  auto labels = labeling::binarize(annotations, thresholds);
  fs::create_directories(config.output_dir);
  labeling::write_labels_csv(config.output_dir + "/labels.csv", labels);
  labeling::write_thresholds_csv(config.output_dir + "/thresholds.csv",
                                 thresholds);
  std::cout << "labeled " << labels.entries.size() << " records\n";
  return 0;
}

int cmd_train(const harness::ExperimentConfig& config) {
  auto data = harness::prepare(config);
  auto report = harness::run_cv(config, data);
  fs::create_directories(config.output_dir);
  {
    std::ofstream out(config.output_dir + "/report.json");
    out << harness::report_to_json(config, report).dump(2) << "\n";
  }
  nn::write_loss_curve_csv(config.output_dir + "/loss_curve.csv",
                           report.last_loss_curve);
  if (!report.fold_errors.empty()) {
    for (const auto& e : report.fold_errors) std::cerr << e << "\n";
    return 3;
  }
  std::cout << "valence accuracy " << report.mean.valence.accuracy
            << ", arousal accuracy " << report.mean.arousal.accuracy << "\n";
  return 0;
}

int cmd_eval(const harness::ExperimentConfig& config) {
  auto data = harness::prepare(config);
  auto rows = harness::run_sweep(config, data);
  fs::create_directories(config.output_dir);
  harness::write_table2_csv(config.output_dir + "/table2.csv", rows);
  std::cout << "wrote " << rows.size() << " sweep rows\n";
  return 0;
}

int cmd_baseline(const harness::ExperimentConfig& config) {
  auto data = harness::prepare(config);
  auto annotations = load_annotations(config.annotations_path);
  std::vector<metrics::RegressionItem> items;
  for (std::size_t i = 0; i < data.dataset.items.size(); ++i) {
    const auto& item = data.dataset.items[i];
    const auto& dec = data.decompositions[i];
    metrics::RegressionItem r;
    r.origin = item.signal.samples;
    r.phasic.assign(dec.phasic.data(), dec.phasic.data() + dec.phasic.size());
    r.tonic.assign(dec.tonic.data(), dec.tonic.data() + dec.tonic.size());
    const auto& ann = annotations.entries.at(
        {item.signal.subject_id, item.signal.song_id});
    r.valence = ann.valence;
    r.arousal = ann.arousal;
    items.push_back(std::move(r));
  }
  auto rows = metrics::run_correlation_experiment(items, config.folds);
  fs::create_directories(config.output_dir);
  metrics::write_table1_csv(config.output_dir + "/table1.csv", rows);
  std::cout << "wrote " << rows.size() << " regression rows\n";
  return 0;
}

int cmd_gradcheck(std::uint64_t seed) {
  auto results = nn::gradient_check_suite(seed);
  bool all_ok = true;
  for (const auto& r : results) {
    bool ok = r.max_rel_error <= 1e-4;
    all_ok = all_ok && ok;
    std::printf("%-26s max_rel_error=%.3e %s\n", r.name.c_str(),
                r.max_rel_error, ok ? "PASS" : "FAIL");
  }
  return all_ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EDA emotion-classification pipeline"};
  app.require_subcommand(1);

  CliOptions opts;
  const char* names[] = {"synth",    "decompose", "label",    "train",
                         "eval",     "baseline",  "gradcheck"};
  const char* descs[] = {
      "generate a synthetic corpus with ground truth",
      "decompose EDA signals into phasic/tonic components",
      "compute per-subject thresholds and binary labels",
      "run cross-validated training for the configured modes",
      "run the channel/feature sweep and write table2.csv",
      "run the regression baselines and write table1.csv",
      "finite-difference gradient checks for all layers"};
  for (int i = 0; i < 7; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    if (std::string(names[i]) != "gradcheck")
      sub->add_option("--config", opts.config_path, "JSON config file")
          ->required();
    else
      sub->add_option("--config", opts.config_path, "JSON config file");
    sub->add_option("--seed", opts.seed, "override the config seed")
        ->each([&](const std::string&) { opts.seed_set = true; });
    sub->add_option("--channel-mode", opts.channel_mode,
                    "origin | tonic | phasic | mix");
    sub->add_option("--feature-mode", opts.feature_mode,
                    "eda_only | music_only | fusion");
    sub->callback([&opts, sub]() { opts.command = sub->get_name(); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (opts.command == "gradcheck") {
      std::uint64_t seed = opts.seed_set ? opts.seed : 0;
      if (!opts.config_path.empty() && !opts.seed_set)
        seed = harness::load_config(opts.config_path).seed;
      return cmd_gradcheck(seed);
    }
    harness::ExperimentConfig config = load_effective_config(opts);
    if (opts.command == "synth") return cmd_synth(config);
    if (opts.command == "decompose") return cmd_decompose(config);
    if (opts.command == "label") return cmd_label(config);
    if (opts.command == "train") return cmd_train(config);
    if (opts.command == "eval") return cmd_eval(config);
    if (opts.command == "baseline") return cmd_baseline(config);
    std::cerr << "unknown subcommand\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const csv::ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "resin/cvxeda.hpp"
#include "resin/imaging.hpp"
#include "resin/labeling.hpp"
#include "resin/metrics.hpp"
#include "resin/nn.hpp"
#include "resin/signal.hpp"
#include "resin/synth.hpp"

namespace resin::harness {

struct SynthCorpusConfig {
  int n_subjects = 12;
  int n_songs = 4;
  double duration_s = 30.0;
  std::size_t n_events_high = 3;  // high-arousal clips get more events
  std::size_t n_events_low = 1;
  double noise_sigma = 0.01;
  std::size_t music_dim = 16;
  double music_signal = 1.0;  // label signal injected into music features
  double music_noise = 0.2;
};

struct ExperimentConfig {
  // Paths
  std::string eda_path;
  std::string annotations_path;
  std::string music_features_path;
  std::string output_dir = ".";
  // Optional staged inputs: reuse artifacts written by earlier subcommands.
  std::string decompositions_dir;
  std::string labels_path;

  double trim_lead_s = 0.0;
  cvxeda::DecomposeParams cvxeda;
  nn::ResSiConfig net;
  int head_hidden = 512;
  nn::TrainConfig train;
  int folds = 10;
  std::uint64_t seed = 0;
  std::string channel_mode = "mix";     // origin | tonic | phasic | mix
  std::string feature_mode = "fusion";  // eda_only | music_only | fusion
  SynthCorpusConfig synth;
};

ExperimentConfig load_config(const std::string& path);
nlohmann::ordered_json config_to_json(const ExperimentConfig& config);

struct FoldPlan {
  int k = 0;
  std::map<std::string, int> fold_of;  // subject -> fold
};

// Subject-disjoint: shuffle with the seeded rng, deal round-robin.
FoldPlan make_folds(const std::set<std::string>& subjects, int k,
                    std::uint64_t seed);

// Everything computed once before cross-validation.
struct PreparedData {
  Dataset dataset;
  MusicFeatureTable music;
  std::map<std::string, labeling::SubjectThreshold> thresholds;
  labeling::LabelSet labels;
  std::vector<cvxeda::Decomposition> decompositions;  // parallel to items
  // Per item: resized 224x224 channel images (origin, phasic, tonic),
  // before mean subtraction.
  std::vector<std::array<imaging::Matrix, 3>> base_images;
};

PreparedData prepare(const ExperimentConfig& config);

struct FoldMetrics {
  metrics::ClassificationMetrics valence;
  metrics::ClassificationMetrics arousal;
};

struct CvReport {
  FoldPlan plan;
  std::vector<FoldMetrics> per_fold;
  FoldMetrics mean;
  std::vector<std::string> fold_errors;
  bool audit_ok = true;
  std::string stats_hash;
  std::vector<nn::LossPoint> last_loss_curve;
};

CvReport run_cv(const ExperimentConfig& config, const PreparedData& data);

nlohmann::ordered_json report_to_json(const ExperimentConfig& config,
                                      const CvReport& report);

struct SweepRow {
  std::string axis;          // V | A
  std::string channel_mode;
  std::string feature_mode;
  double accuracy = 0.0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Table-2-shaped comparison: channel sweep with fusion features plus the
// feature sweep on mixed channels.
std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                const PreparedData& data);
void write_table2_csv(const std::string& path,
                      const std::vector<SweepRow>& rows);

// Synthetic corpus where arousal tracks event count, valence tracks tonic
// level, and music features carry label signal.
struct SynthCorpus {
  std::vector<EdaSignal> signals;
  AnnotationSet annotations;
  MusicFeatureTable music;
  std::map<SubjectSong, synth::GroundTruth> ground_truth;
};
SynthCorpus make_synth_corpus(const SynthCorpusConfig& config,
                              std::uint64_t seed);

std::uint64_t fnv1a_hash(const std::vector<double>& values,
                         std::uint64_t h = 1469598103934665603ULL);

}  // namespace resin::harness

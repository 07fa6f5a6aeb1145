#include "resin/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

#include "resin/csv.hpp"

namespace resin::harness {

// ------------------------------------------------------------------ config

namespace {

template <typename T>
void maybe_get(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  nlohmann::json j;
  in >> j;
  ExperimentConfig c;
  maybe_get(j, "eda_path", c.eda_path);
  maybe_get(j, "annotations_path", c.annotations_path);
  maybe_get(j, "music_features_path", c.music_features_path);
  maybe_get(j, "output_dir", c.output_dir);
  maybe_get(j, "decompositions_dir", c.decompositions_dir);
  maybe_get(j, "labels_path", c.labels_path);
  maybe_get(j, "trim_lead_s", c.trim_lead_s);
  maybe_get(j, "folds", c.folds);
  maybe_get(j, "seed", c.seed);
  maybe_get(j, "channel_mode", c.channel_mode);
  maybe_get(j, "feature_mode", c.feature_mode);
  maybe_get(j, "head_hidden", c.head_hidden);
  if (j.contains("cvxeda")) {
    const auto& e = j["cvxeda"];
    maybe_get(e, "tau0", c.cvxeda.tau0);
    maybe_get(e, "tau1", c.cvxeda.tau1);
    maybe_get(e, "alpha", c.cvxeda.alpha);
    maybe_get(e, "gamma", c.cvxeda.gamma);
    maybe_get(e, "knot_spacing_s", c.cvxeda.knot_spacing_s);
  }
  if (j.contains("qp")) {
    const auto& q = j["qp"];
    maybe_get(q, "eps_primal", c.cvxeda.qp.eps_primal);
    maybe_get(q, "eps_dual", c.cvxeda.qp.eps_dual);
    maybe_get(q, "max_iter", c.cvxeda.qp.max_iter);
    maybe_get(q, "rho", c.cvxeda.qp.rho);
    maybe_get(q, "sigma", c.cvxeda.qp.sigma);
    maybe_get(q, "alpha_relax", c.cvxeda.qp.alpha_relax);
  }
  if (j.contains("net")) {
    const auto& n = j["net"];
    maybe_get(n, "stage_channels", c.net.stage_channels);
    maybe_get(n, "blocks_per_stage", c.net.blocks_per_stage);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    maybe_get(t, "batch_size", c.train.batch_size);
    maybe_get(t, "lr0", c.train.lr0);
    maybe_get(t, "decay_factor", c.train.decay_factor);
    maybe_get(t, "decay_every", c.train.decay_every);
    maybe_get(t, "max_iters", c.train.max_iters);
    maybe_get(t, "momentum", c.train.momentum);
    maybe_get(t, "augment", c.train.augment);
  }
  if (j.contains("synth")) {
    const auto& s = j["synth"];
    maybe_get(s, "n_subjects", c.synth.n_subjects);
    maybe_get(s, "n_songs", c.synth.n_songs);
    maybe_get(s, "duration_s", c.synth.duration_s);
    maybe_get(s, "n_events_high", c.synth.n_events_high);
    maybe_get(s, "n_events_low", c.synth.n_events_low);
    maybe_get(s, "noise_sigma", c.synth.noise_sigma);
    maybe_get(s, "music_dim", c.synth.music_dim);
    maybe_get(s, "music_signal", c.synth.music_signal);
    maybe_get(s, "music_noise", c.synth.music_noise);
  }
  if (c.folds < 2) throw std::runtime_error("folds must be >= 2");
  return c;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["eda_path"] = c.eda_path;
  j["annotations_path"] = c.annotations_path;
  j["music_features_path"] = c.music_features_path;
  j["output_dir"] = c.output_dir;
  j["decompositions_dir"] = c.decompositions_dir;
  j["labels_path"] = c.labels_path;
  j["trim_lead_s"] = c.trim_lead_s;
  j["cvxeda"] = {{"tau0", c.cvxeda.tau0},
                 {"tau1", c.cvxeda.tau1},
                 {"alpha", c.cvxeda.alpha},
                 {"gamma", c.cvxeda.gamma},
                 {"knot_spacing_s", c.cvxeda.knot_spacing_s}};
  j["qp"] = {{"eps_primal", c.cvxeda.qp.eps_primal},
             {"eps_dual", c.cvxeda.qp.eps_dual},
             {"max_iter", c.cvxeda.qp.max_iter},
             {"rho", c.cvxeda.qp.rho},
             {"sigma", c.cvxeda.qp.sigma},
             {"alpha_relax", c.cvxeda.qp.alpha_relax}};
  j["net"] = {{"stage_channels", c.net.stage_channels},
              {"blocks_per_stage", c.net.blocks_per_stage}};
  j["head_hidden"] = c.head_hidden;
  j["train"] = {{"batch_size", c.train.batch_size},
                {"lr0", c.train.lr0},
                {"decay_factor", c.train.decay_factor},
                {"decay_every", c.train.decay_every},
                {"max_iters", c.train.max_iters},
                {"momentum", c.train.momentum},
                {"augment", c.train.augment}};
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["channel_mode"] = c.channel_mode;
  j["feature_mode"] = c.feature_mode;
  j["synth"] = {{"n_subjects", c.synth.n_subjects},
                {"n_songs", c.synth.n_songs},
                {"duration_s", c.synth.duration_s},
                {"n_events_high", c.synth.n_events_high},
                {"n_events_low", c.synth.n_events_low},
                {"noise_sigma", c.synth.noise_sigma},
                {"music_dim", c.synth.music_dim},
                {"music_signal", c.synth.music_signal},
                {"music_noise", c.synth.music_noise}};
  return j;
}

// ------------------------------------------------------------------- folds

FoldPlan make_folds(const std::set<std::string>& subjects, int k,
                    std::uint64_t seed) {
  if (static_cast<int>(subjects.size()) < k)
    throw std::runtime_error("need at least k subjects for k folds");
  std::vector<std::string> order(subjects.begin(), subjects.end());
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  FoldPlan plan;
  plan.k = k;
  for (std::size_t i = 0; i < order.size(); ++i)
    plan.fold_of[order[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return plan;
}

// ----------------------------------------------------------- synth corpus

SynthCorpus make_synth_corpus(const SynthCorpusConfig& config,
                              std::uint64_t seed) {
  SynthCorpus corpus;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.08, 0.08);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Song-intrinsic bases: the four V/A quadrants cycled over songs.
  std::vector<std::pair<double, double>> bases;  // (valence, arousal)
  for (int s = 0; s < config.n_songs; ++s) {
    double v = (s % 2 == 0) ? 0.25 : 0.75;
    double a = ((s / 2) % 2 == 0) ? 0.25 : 0.75;
    bases.emplace_back(v, a);
  }

  // Music vectors: label signal in the leading dims, noise elsewhere.
  corpus.music.dim = config.music_dim;
  for (int s = 0; s < config.n_songs; ++s) {
    std::vector<double> vec(config.music_dim);
    for (double& v : vec) v = config.music_noise * gauss(rng);
    if (config.music_dim >= 2) {
      vec[0] += config.music_signal * (bases[static_cast<std::size_t>(s)].first - 0.5);
      vec[1] += config.music_signal * (bases[static_cast<std::size_t>(s)].second - 0.5);
    }
    corpus.music.entries.emplace("g" + std::to_string(s), std::move(vec));
  }

  for (int subj = 0; subj < config.n_subjects; ++subj) {
    std::string subject = "s" + std::to_string(subj);
    for (int s = 0; s < config.n_songs; ++s) {
      std::string song = "g" + std::to_string(s);
      auto [v_base, a_base] = bases[static_cast<std::size_t>(s)];
      double v = std::clamp(v_base + jitter(rng), 0.05, 0.95);
      double a = std::clamp(a_base + jitter(rng), 0.05, 0.95);
      corpus.annotations.entries[{subject, song}] = {v, a};

      synth::GenConfig gen;
      gen.duration_s = config.duration_s;
      gen.n_events = a > 0.5 ? config.n_events_high : config.n_events_low;
      gen.noise_sigma = config.noise_sigma;
      std::uint64_t sig_seed = seed * 1000003ULL +
                               static_cast<std::uint64_t>(subj) * 131ULL +
                               static_cast<std::uint64_t>(s);
      auto [signal, gt] = synth::generate(gen, sig_seed);
      signal.subject_id = subject;
      signal.song_id = song;
      // Valence shows up as a baseline offset.
      double offset = v > 0.5 ? 0.8 : 0.0;
      for (auto& x : signal.samples) x += offset;
      for (auto& x : gt.tonic_true) x += offset;
      corpus.ground_truth.emplace(SubjectSong{subject, song}, std::move(gt));
      corpus.signals.push_back(std::move(signal));
    }
  }
  return corpus;
}

// ----------------------------------------------------------------- prepare

namespace {

cvxeda::Decomposition load_decomposition_csv(const std::string& path) {
  auto rows = csv::read_rows(path, "sample_index,origin,phasic,tonic,residual");
  const auto n = static_cast<Eigen::Index>(rows.size());
  cvxeda::Decomposition d;
  d.phasic.resize(n);
  d.tonic.resize(n);
  d.residual.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (row.fields.size() != 5)
      throw csv::ParseError("expected 5 fields", row.line);
    d.phasic[i] = csv::parse_double(row.fields[2], row.line);
    d.tonic[i] = csv::parse_double(row.fields[3], row.line);
    d.residual[i] = csv::parse_double(row.fields[4], row.line);
  }
  return d;
}

}  // namespace

PreparedData prepare(const ExperimentConfig& config) {
  PreparedData data;
  auto signals = load_eda_csv(config.eda_path);
  if (config.trim_lead_s > 0.0)
    for (auto& s : signals) s = trim_lead(s, config.trim_lead_s);
  auto annotations = load_annotations(config.annotations_path);
  data.music = load_music_features(config.music_features_path);
  data.dataset = assemble_dataset(signals, annotations, data.music);

  data.thresholds = labeling::all_thresholds(annotations);
  if (!config.labels_path.empty())
    data.labels = labeling::load_labels_csv(config.labels_path);
  else
    data.labels = labeling::binarize(annotations, data.thresholds);
  labeling::apply_labels(data.dataset, data.labels);

  cvxeda::Decomposer decomposer(config.cvxeda);
  data.decompositions.reserve(data.dataset.items.size());
  for (const auto& item : data.dataset.items) {
    if (!config.decompositions_dir.empty()) {
      std::string path = config.decompositions_dir + "/" +
                         item.signal.subject_id + "_" + item.signal.song_id +
                         ".csv";
      data.decompositions.push_back(load_decomposition_csv(path));
    } else {
      data.decompositions.push_back(decomposer(item.signal));
    }
  }

  data.base_images.reserve(data.dataset.items.size());
  for (std::size_t i = 0; i < data.dataset.items.size(); ++i) {
    const auto& item = data.dataset.items[i];
    const auto& dec = data.decompositions[i];
    auto to_vec = [](const Eigen::VectorXd& v) {
      return std::vector<double>(v.data(), v.data() + v.size());
    };
    std::array<std::vector<double>, 3> raw = {
        item.signal.samples, to_vec(dec.phasic), to_vec(dec.tonic)};
    std::array<imaging::Matrix, 3> imgs;
    for (int c = 0; c < 3; ++c)
      imgs[static_cast<std::size_t>(c)] = imaging::bilinear_resize(
          imaging::signal_to_matrix(
              imaging::minmax_normalize(raw[static_cast<std::size_t>(c)])),
          imaging::kImageSize, imaging::kImageSize);
    data.base_images.push_back(std::move(imgs));
  }
  return data;
}

// ------------------------------------------------------------------ run_cv

namespace {

std::array<int, 3> channel_map(const std::string& mode) {
  if (mode == "mix") return {0, 1, 2};
  if (mode == "origin") return {0, 0, 0};
  if (mode == "phasic") return {1, 1, 1};
  if (mode == "tonic") return {2, 2, 2};
  throw std::runtime_error("unknown channel_mode " + mode);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t salt) {
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct FoldStats {
  std::array<double, 3> channel_mean = {0, 0, 0};
  metrics::ZscoreStats music;
};

FoldStats compute_fold_stats(const PreparedData& data,
                             const std::vector<std::size_t>& train_idx,
                             const std::array<int, 3>& cmap) {
  FoldStats stats;
  for (std::size_t idx : train_idx)
    for (int c = 0; c < 3; ++c)
      stats.channel_mean[static_cast<std::size_t>(c)] +=
          data.base_images[idx][static_cast<std::size_t>(
                                    cmap[static_cast<std::size_t>(c)])]
              .mean();
  for (double& m : stats.channel_mean)
    m /= static_cast<double>(train_idx.size());

  Eigen::MatrixXd M(static_cast<Eigen::Index>(train_idx.size()),
                    static_cast<Eigen::Index>(data.music.dim));
  for (std::size_t r = 0; r < train_idx.size(); ++r) {
    const auto& vec =
        data.music.entries.at(data.dataset.items[train_idx[r]].music_ref);
    for (std::size_t c = 0; c < data.music.dim; ++c)
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = vec[c];
  }
  stats.music = metrics::fit_zscore(M);
  return stats;
}

std::vector<double> stats_to_vector(const FoldStats& s) {
  std::vector<double> out(s.channel_mean.begin(), s.channel_mean.end());
  out.insert(out.end(), s.music.mean.data(),
             s.music.mean.data() + s.music.mean.size());
  out.insert(out.end(), s.music.std.data(),
             s.music.std.data() + s.music.std.size());
  return out;
}

nn::NnSample make_sample(const PreparedData& data, std::size_t idx,
                         const FoldStats& stats, const std::array<int, 3>& cmap,
                         int axis) {
  nn::NnSample sample;
  for (int c = 0; c < 3; ++c) {
    sample.base[static_cast<std::size_t>(c)] =
        data.base_images[idx][static_cast<std::size_t>(
            cmap[static_cast<std::size_t>(c)])];
    sample.base[static_cast<std::size_t>(c)].array() -=
        stats.channel_mean[static_cast<std::size_t>(c)];
  }
  const auto& vec = data.music.entries.at(data.dataset.items[idx].music_ref);
  sample.music = Eigen::Map<const Eigen::VectorXd>(
      vec.data(), static_cast<Eigen::Index>(vec.size()));
  const auto& item = data.dataset.items[idx];
  sample.label = axis == 0 ? item.valence_label : item.arousal_label;
  return sample;
}

Eigen::VectorXd head_stat_mean(int eda_dim, const metrics::ZscoreStats& music) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(eda_dim + music.mean.size());
  mean.tail(music.mean.size()) = music.mean;
  return mean;
}

Eigen::VectorXd head_stat_std(int eda_dim, const metrics::ZscoreStats& music) {
  Eigen::VectorXd std_ = Eigen::VectorXd::Ones(eda_dim + music.std.size());
  std_.tail(music.std.size()) = music.std;
  return std_;
}

}  // namespace

CvReport run_cv(const ExperimentConfig& config, const PreparedData& data) {
  CvReport report;
  report.plan = make_folds(data.dataset.subjects, config.folds, config.seed);
  const auto cmap = channel_map(config.channel_mode);
  const bool use_music =
      config.feature_mode == "fusion" || config.feature_mode == "music_only";
  const bool use_eda = config.feature_mode != "music_only";
  if (config.feature_mode != "fusion" && config.feature_mode != "eda_only" &&
      config.feature_mode != "music_only")
    throw std::runtime_error("unknown feature_mode " + config.feature_mode);

  std::vector<double> audit_stats;

  for (int fold = 0; fold < config.folds; ++fold) {
    try {
      std::vector<std::size_t> train_idx, test_idx;
      for (std::size_t i = 0; i < data.dataset.items.size(); ++i) {
        int f = report.plan.fold_of.at(data.dataset.items[i].signal.subject_id);
        (f == fold ? test_idx : train_idx).push_back(i);
      }
      if (train_idx.empty() || test_idx.empty())
        throw std::runtime_error("empty fold " + std::to_string(fold));

      FoldStats stats = compute_fold_stats(data, train_idx, cmap);
      auto sv = stats_to_vector(stats);
      audit_stats.insert(audit_stats.end(), sv.begin(), sv.end());

      FoldMetrics fm;
      for (int axis = 0; axis < 2; ++axis) {
        std::vector<int> preds, trues;
        if (config.feature_mode == "music_only") {
          // SVM on z-scored music vectors.
          Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(train_idx.size()),
                              static_cast<Eigen::Index>(data.music.dim));
          std::vector<int> ytr;
          for (std::size_t r = 0; r < train_idx.size(); ++r) {
            const auto& item = data.dataset.items[train_idx[r]];
            const auto& vec = data.music.entries.at(item.music_ref);
            for (std::size_t c = 0; c < data.music.dim; ++c)
              Xtr(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                  vec[c];
            ytr.push_back(axis == 0 ? item.valence_label : item.arousal_label);
          }
          Eigen::MatrixXd Xtr_z = metrics::apply_zscore(Xtr, stats.music);
          auto svm = metrics::fit_linear_svm(Xtr_z, ytr);
          for (std::size_t idx : test_idx) {
            const auto& item = data.dataset.items[idx];
            const auto& vec = data.music.entries.at(item.music_ref);
            Eigen::MatrixXd row(1, static_cast<Eigen::Index>(data.music.dim));
            for (std::size_t c = 0; c < data.music.dim; ++c)
              row(0, static_cast<Eigen::Index>(c)) = vec[c];
            Eigen::MatrixXd row_z = metrics::apply_zscore(row, stats.music);
            preds.push_back(metrics::predict_class(svm, row_z.row(0)));
            trues.push_back(axis == 0 ? item.valence_label
                                      : item.arousal_label);
          }
        } else {
          nn::Model model = nn::make_model(
              config.net, static_cast<int>(data.music.dim), config.head_hidden,
              use_eda, use_music,
              derive_seed(config.seed, static_cast<std::uint64_t>(
                                           fold * 2 + axis)));
          if (use_music)
            model.head.set_stats(
                head_stat_mean(model.head.eda_dim(), stats.music),
                head_stat_std(model.head.eda_dim(), stats.music));
          std::vector<nn::NnSample> train_samples;
          train_samples.reserve(train_idx.size());
          for (std::size_t idx : train_idx)
            train_samples.push_back(make_sample(data, idx, stats, cmap, axis));
          nn::TrainConfig tc = config.train;
          tc.seed = derive_seed(config.seed,
                                1000 + static_cast<std::uint64_t>(
                                           fold * 2 + axis));
          auto curve = nn::train(model, train_samples, tc);
          if (axis == 0) report.last_loss_curve = curve;
          for (std::size_t idx : test_idx) {
            nn::NnSample sample = make_sample(data, idx, stats, cmap, axis);
            preds.push_back(nn::predict(model, sample).label);
            trues.push_back(sample.label);
          }
        }
        auto m = metrics::classify_metrics(preds, trues);
        (axis == 0 ? fm.valence : fm.arousal) = m;
      }
      report.per_fold.push_back(fm);
    } catch (const std::exception& e) {
      report.fold_errors.push_back("fold " + std::to_string(fold) + ": " +
                                   e.what());
    }
  }

  // Leakage audit: recompute the train-only stats and compare hashes.
  std::uint64_t h1 = fnv1a_hash(audit_stats);
  std::vector<double> audit_recompute;
  for (int fold = 0; fold < config.folds; ++fold) {
    std::vector<std::size_t> train_idx;
    for (std::size_t i = 0; i < data.dataset.items.size(); ++i)
      if (report.plan.fold_of.at(data.dataset.items[i].signal.subject_id) !=
          fold)
        train_idx.push_back(i);
    if (train_idx.empty()) continue;
    auto sv = stats_to_vector(compute_fold_stats(data, train_idx, cmap));
    audit_recompute.insert(audit_recompute.end(), sv.begin(), sv.end());
  }
  std::uint64_t h2 = fnv1a_hash(audit_recompute);
  report.audit_ok = report.fold_errors.empty() ? (h1 == h2) : false;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h1));
  report.stats_hash = buf;

  if (!report.per_fold.empty()) {
    auto avg = [&](auto pick) {
      metrics::ClassificationMetrics m;
      double n = static_cast<double>(report.per_fold.size());
      for (const auto& f : report.per_fold) {
        const auto& x = pick(f);
        m.accuracy += x.accuracy / n;
        m.f1 += x.f1 / n;
        m.precision += x.precision / n;
        m.recall += x.recall / n;
        m.tp += x.tp;
        m.fp += x.fp;
        m.tn += x.tn;
        m.fn += x.fn;
      }
      return m;
    };
    report.mean.valence = avg([](const FoldMetrics& f) -> const auto& {
      return f.valence;
    });
    report.mean.arousal = avg([](const FoldMetrics& f) -> const auto& {
      return f.arousal;
    });
  }
  return report;
}

// ------------------------------------------------------------------ report

namespace {

nlohmann::ordered_json metrics_to_json(
    const metrics::ClassificationMetrics& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["f1"] = m.f1;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j;
}

}  // namespace

nlohmann::ordered_json report_to_json(const ExperimentConfig& config,
                                      const CvReport& report) {
  nlohmann::ordered_json j;
  j["config"] = config_to_json(config);
  j["folds"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < report.per_fold.size(); ++i) {
    nlohmann::ordered_json f;
    f["fold"] = i;
    f["valence"] = metrics_to_json(report.per_fold[i].valence);
    f["arousal"] = metrics_to_json(report.per_fold[i].arousal);
    j["folds"].push_back(f);
  }
  j["mean"]["valence"] = metrics_to_json(report.mean.valence);
  j["mean"]["arousal"] = metrics_to_json(report.mean.arousal);
  j["fold_assignment"] = report.plan.fold_of;
  j["errors"] = report.fold_errors;
  j["audit_ok"] = report.audit_ok;
  j["stats_hash"] = report.stats_hash;
  return j;
}

std::vector<SweepRow> run_sweep(const ExperimentConfig& config,
                                const PreparedData& data) {
  std::vector<SweepRow> rows;
  auto push = [&](const std::string& channel, const std::string& feature) {
    ExperimentConfig c = config;
    c.channel_mode = channel;
    c.feature_mode = feature;
    CvReport r = run_cv(c, data);
    if (!r.fold_errors.empty())
      throw std::runtime_error("sweep cell (" + channel + "," + feature +
                               ") failed: " + r.fold_errors.front());
    for (int axis = 0; axis < 2; ++axis) {
      const auto& m = axis == 0 ? r.mean.valence : r.mean.arousal;
      rows.push_back({axis == 0 ? "V" : "A", channel, feature, m.accuracy,
                      m.f1, m.precision, m.recall});
    }
  };
  for (const char* channel : {"origin", "tonic", "phasic", "mix"})
    push(channel, "fusion");
  for (const char* feature : {"eda_only", "music_only"})
    push("mix", feature);
  return rows;
}

void write_table2_csv(const std::string& path,
                      const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "axis,channel_mode,feature_mode,accuracy,f1,precision,recall\n";
  for (const auto& r : rows)
    out << r.axis << ',' << r.channel_mode << ',' << r.feature_mode << ','
        << csv::format_double(r.accuracy) << ',' << csv::format_double(r.f1)
        << ',' << csv::format_double(r.precision) << ','
        << csv::format_double(r.recall) << "\n";
}

std::uint64_t fnv1a_hash(const std::vector<double>& values, std::uint64_t h) {
  for (double v : values) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffULL;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

}  // namespace resin::harness

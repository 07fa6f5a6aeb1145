#include "resin/labeling.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "resin/csv.hpp"

namespace resin::labeling {

TwoMeans two_means_1d(const std::vector<double>& values) {
  const std::size_t n = values.size();
  if (n == 0) throw std::invalid_argument("two_means_1d: empty input");
  TwoMeans out;
  if (std::all_of(values.begin(), values.end(),
                  [&](double v) { return v == values.front(); })) {
    out.degenerate = true;
    out.c_low = out.c_high = values.front();
    out.assignment.assign(n, 0);
    return out;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> sorted(n), prefix(n + 1, 0.0), prefix2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = values[order[i]];
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + sorted[i];
    prefix2[i + 1] = prefix2[i] + sorted[i] * sorted[i];
  }
  auto sse = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    double cnt = static_cast<double>(hi - lo);
    double sum = prefix[hi] - prefix[lo];
    double sum2 = prefix2[hi] - prefix2[lo];
    return sum2 - sum * sum / cnt;
  };

  // <= keeps the later (larger) split on ties: smaller high cluster.
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t best_split = 1;
  for (std::size_t s = 1; s < n; ++s) {
    double cost = sse(0, s) + sse(s, n);
    if (cost <= best_cost) {
      best_cost = cost;
      best_split = s;
    }
  }

  out.c_low = (prefix[best_split]) / static_cast<double>(best_split);
  out.c_high =
      (prefix[n] - prefix[best_split]) / static_cast<double>(n - best_split);
  out.assignment.assign(n, 0);
  for (std::size_t i = best_split; i < n; ++i) out.assignment[order[i]] = 1;
  return out;
}

SubjectThreshold subject_threshold(const std::string& subject_id,
                                   const std::vector<Annotation>& annotations) {
  if (annotations.empty())
    throw std::invalid_argument("subject_threshold: no annotations");
  SubjectThreshold t;
  t.subject_id = subject_id;
  std::vector<double> vals(annotations.size()), arous(annotations.size());
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    vals[i] = annotations[i].valence;
    arous[i] = annotations[i].arousal;
  }
  TwoMeans v = two_means_1d(vals);
  TwoMeans a = two_means_1d(arous);
  t.degenerate_v = v.degenerate;
  t.degenerate_a = a.degenerate;
  t.valence_threshold = v.degenerate ? v.c_low : 0.5 * (v.c_low + v.c_high);
  t.arousal_threshold = a.degenerate ? a.c_low : 0.5 * (a.c_low + a.c_high);
  return t;
}

std::map<std::string, SubjectThreshold> all_thresholds(
    const AnnotationSet& annotations) {
  std::map<std::string, std::vector<Annotation>> by_subject;
  for (const auto& [key, ann] : annotations.entries)
    by_subject[key.first].push_back(ann);
  std::map<std::string, SubjectThreshold> out;
  for (const auto& [subject, anns] : by_subject)
    out.emplace(subject, subject_threshold(subject, anns));
  return out;
}

LabelSet binarize(const AnnotationSet& annotations,
                  const std::map<std::string, SubjectThreshold>& thresholds) {
  LabelSet labels;
  for (const auto& [key, ann] : annotations.entries) {
    auto it = thresholds.find(key.first);
    if (it == thresholds.end())
      throw std::runtime_error("missing threshold for subject " + key.first);
    const SubjectThreshold& t = it->second;
    int v = (!t.degenerate_v && ann.valence > t.valence_threshold) ? 1 : 0;
    int a = (!t.degenerate_a && ann.arousal > t.arousal_threshold) ? 1 : 0;
    labels.entries[key] = {v, a};
  }
  return labels;
}

void apply_labels(Dataset& dataset, const LabelSet& labels) {
  for (auto& item : dataset.items) {
    SubjectSong key{item.signal.subject_id, item.signal.song_id};
    auto it = labels.entries.find(key);
    if (it == labels.entries.end())
      throw std::runtime_error("missing label for (" + key.first + "," +
                               key.second + ")");
    item.valence_label = it->second.first;
    item.arousal_label = it->second.second;
  }
}

void write_labels_csv(const std::string& path, const LabelSet& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "subject_id,song_id,valence_label,arousal_label\n";
  for (const auto& [key, lab] : labels.entries)
    out << key.first << ',' << key.second << ',' << lab.first << ','
        << lab.second << "\n";
}

LabelSet load_labels_csv(const std::string& path) {
  auto rows =
      csv::read_rows(path, "subject_id,song_id,valence_label,arousal_label");
  LabelSet labels;
  for (const auto& row : rows) {
    if (row.fields.size() != 4)
      throw csv::ParseError("expected 4 fields", row.line);
    int v = static_cast<int>(csv::parse_int(row.fields[2], row.line));
    int a = static_cast<int>(csv::parse_int(row.fields[3], row.line));
    if ((v != 0 && v != 1) || (a != 0 && a != 1))
      throw csv::ParseError("labels must be 0 or 1", row.line);
    labels.entries[{row.fields[0], row.fields[1]}] = {v, a};
  }
  return labels;
}

void write_thresholds_csv(
    const std::string& path,
    const std::map<std::string, SubjectThreshold>& thresholds) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "subject_id,v_threshold,a_threshold,v_degenerate,a_degenerate\n";
  for (const auto& [subject, t] : thresholds)
    out << subject << ',' << csv::format_double(t.valence_threshold) << ','
        << csv::format_double(t.arousal_threshold) << ','
        << (t.degenerate_v ? 1 : 0) << ',' << (t.degenerate_a ? 1 : 0) << "\n";
}

}  // namespace resin::labeling

#pragma once

#include <map>
#include <string>
#include <vector>

#include "resin/signal.hpp"

namespace resin::labeling {

struct TwoMeans {
  double c_low = 0.0;
  double c_high = 0.0;
  std::vector<int> assignment;  // 0 = low cluster, 1 = high cluster
  bool degenerate = false;      // all values identical, no split
};

// Exact 1-D 2-means: optimal clusters are contiguous in sorted order, so
// scanning all n-1 split points finds the global optimum. Cost ties break
// toward the smaller high cluster.
TwoMeans two_means_1d(const std::vector<double>& values);

struct SubjectThreshold {
  std::string subject_id;
  double valence_threshold = 0.0;
  double arousal_threshold = 0.0;
  bool degenerate_v = false;
  bool degenerate_a = false;
};

struct LabelSet {
  std::map<SubjectSong, std::pair<int, int>> entries;  // (valence, arousal)
};

// Midpoint of the two cluster centers, per axis; a degenerate axis keeps
// the common value as its threshold with the flag set.
SubjectThreshold subject_threshold(
    const std::string& subject_id,
    const std::vector<Annotation>& annotations);

std::map<std::string, SubjectThreshold> all_thresholds(
    const AnnotationSet& annotations);

// label 1 iff value > threshold (strict); degenerate axes label all-low.
LabelSet binarize(const AnnotationSet& annotations,
                  const std::map<std::string, SubjectThreshold>& thresholds);

void apply_labels(Dataset& dataset, const LabelSet& labels);

void write_labels_csv(const std::string& path, const LabelSet& labels);
LabelSet load_labels_csv(const std::string& path);
void write_thresholds_csv(
    const std::string& path,
    const std::map<std::string, SubjectThreshold>& thresholds);

}  // namespace resin::labeling

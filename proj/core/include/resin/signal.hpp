#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace resin {

// One subject x song conductance sequence. Dataset signals are 50 Hz.
struct EdaSignal {
  std::string subject_id;
  std::string song_id;
  double sample_rate_hz = 50.0;
  std::vector<double> samples;  // microsiemens
};

using SubjectSong = std::pair<std::string, std::string>;

struct Annotation {
  double valence = 0.0;  // in [0,1]
  double arousal = 0.0;  // in [0,1]
};

struct AnnotationSet {
  std::map<SubjectSong, Annotation> entries;
};

struct MusicFeatureTable {
  std::size_t dim = 0;
  std::map<std::string, std::vector<double>> entries;  // song_id -> vector
};

struct DatasetItem {
  EdaSignal signal;
  int valence_label = -1;  // -1 until labeling runs
  int arousal_label = -1;
  std::string music_ref;  // song_id into the feature table
};

struct Dataset {
  std::vector<DatasetItem> items;  // sorted by (subject, song)
  std::set<std::string> subjects;
  // (subject,song) pairs dropped for missing annotation or music vector.
  std::vector<std::pair<SubjectSong, std::string>> skipped;
};

// CSV schema: subject_id,song_id,sample_index,eda_us with 0-based contiguous
// sample_index per group. Gaps and non-monotone indices are integrity errors.
std::vector<EdaSignal> load_eda_csv(const std::string& path);
void write_eda_csv(const std::string& path,
                   const std::vector<EdaSignal>& signals);

// Drops the first floor(seconds * rate) samples.
EdaSignal trim_lead(const EdaSignal& signal, double seconds);

AnnotationSet load_annotations(const std::string& path);
MusicFeatureTable load_music_features(const std::string& path);
void write_annotations(const std::string& path, const AnnotationSet& ann);
void write_music_features(const std::string& path,
                          const MusicFeatureTable& table);

// Keeps exactly the pairs present in all three sources; the rest land in the
// skip report.
Dataset assemble_dataset(const std::vector<EdaSignal>& signals,
                         const AnnotationSet& annotations,
                         const MusicFeatureTable& features);

}  // namespace resin

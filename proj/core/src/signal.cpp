#include "resin/signal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "resin/csv.hpp"

namespace resin {

namespace {
constexpr const char* kEdaHeader = "subject_id,song_id,sample_index,eda_us";
constexpr const char* kAnnHeader = "subject_id,song_id,valence,arousal";
}  // namespace

std::vector<EdaSignal> load_eda_csv(const std::string& path) {
  auto rows = csv::read_rows(path, kEdaHeader);
  std::vector<EdaSignal> out;
  for (const auto& row : rows) {
    if (row.fields.size() != 4)
      throw csv::ParseError("expected 4 fields", row.line);
    const std::string& subject = row.fields[0];
    const std::string& song = row.fields[1];
    std::int64_t idx = csv::parse_int(row.fields[2], row.line);
    double value = csv::parse_double(row.fields[3], row.line);
    if (!std::isfinite(value))
      throw csv::ParseError("non-finite sample", row.line);

    bool new_group = out.empty() || out.back().subject_id != subject ||
                     out.back().song_id != song;
    if (new_group) {
      if (idx != 0)
        throw std::runtime_error("integrity error: group (" + subject + "," +
                                 song + ") starts at sample_index " +
                                 std::to_string(idx) + ", expected 0");
      out.push_back({subject, song, 50.0, {}});
    } else if (idx != static_cast<std::int64_t>(out.back().samples.size())) {
      throw std::runtime_error(
          "integrity error: group (" + subject + "," + song +
          ") has sample_index " + std::to_string(idx) + " after " +
          std::to_string(out.back().samples.size() - 1));
    }
    out.back().samples.push_back(value);
  }
  return out;
}

void write_eda_csv(const std::string& path,
                   const std::vector<EdaSignal>& signals) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kEdaHeader << "\n";
  for (const auto& s : signals)
    for (std::size_t i = 0; i < s.samples.size(); ++i)
      out << s.subject_id << ',' << s.song_id << ',' << i << ','
          << csv::format_double(s.samples[i]) << "\n";
}

EdaSignal trim_lead(const EdaSignal& signal, double seconds) {
  if (seconds < 0) throw std::invalid_argument("trim seconds must be >= 0");
  auto drop =
      static_cast<std::size_t>(std::floor(seconds * signal.sample_rate_hz));
  if (drop > signal.samples.size())
    throw std::runtime_error("trim of " + std::to_string(drop) +
                             " samples exceeds signal length " +
                             std::to_string(signal.samples.size()));
  EdaSignal out = signal;
  out.samples.assign(signal.samples.begin() + static_cast<std::ptrdiff_t>(drop),
                     signal.samples.end());
  return out;
}

AnnotationSet load_annotations(const std::string& path) {
  auto rows = csv::read_rows(path, kAnnHeader);
  AnnotationSet set;
  for (const auto& row : rows) {
    if (row.fields.size() != 4)
      throw csv::ParseError("expected 4 fields", row.line);
    SubjectSong key{row.fields[0], row.fields[1]};
    Annotation a;
    a.valence = csv::parse_double(row.fields[2], row.line);
    a.arousal = csv::parse_double(row.fields[3], row.line);
    if (!(a.valence >= 0.0 && a.valence <= 1.0) ||
        !(a.arousal >= 0.0 && a.arousal <= 1.0))
      throw std::runtime_error("annotation out of [0,1] at line " +
                               std::to_string(row.line));
    if (!set.entries.emplace(key, a).second)
      throw std::runtime_error("duplicate annotation for (" + key.first + "," +
                               key.second + ")");
  }
  return set;
}

void write_annotations(const std::string& path, const AnnotationSet& ann) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kAnnHeader << "\n";
  for (const auto& [key, a] : ann.entries)
    out << key.first << ',' << key.second << ','
        << csv::format_double(a.valence) << ',' << csv::format_double(a.arousal)
        << "\n";
}

MusicFeatureTable load_music_features(const std::string& path) {
  std::string header = csv::read_header(path);
  auto cols = csv::split_fields(header);
  if (cols.size() < 2 || cols[0] != "song_id")
    throw std::runtime_error("music_features header must be song_id,f0,...");
  MusicFeatureTable table;
  table.dim = cols.size() - 1;
  for (std::size_t i = 0; i < table.dim; ++i)
    if (cols[i + 1] != "f" + std::to_string(i))
      throw std::runtime_error("music_features header column " +
                               std::to_string(i + 1) + " must be f" +
                               std::to_string(i));
  for (const auto& row : csv::read_rows_any_header(path)) {
    if (row.fields.size() != table.dim + 1)
      throw csv::ParseError("expected " + std::to_string(table.dim + 1) +
                                " fields",
                            row.line);
    std::vector<double> v(table.dim);
    for (std::size_t i = 0; i < table.dim; ++i) {
      v[i] = csv::parse_double(row.fields[i + 1], row.line);
      if (!std::isfinite(v[i]))
        throw csv::ParseError("non-finite feature", row.line);
    }
    if (!table.entries.emplace(row.fields[0], std::move(v)).second)
      throw std::runtime_error("duplicate music vector for song " +
                               row.fields[0]);
  }
  return table;
}

void write_music_features(const std::string& path,
                          const MusicFeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "song_id";
  for (std::size_t i = 0; i < table.dim; ++i) out << ",f" << i;
  out << "\n";
  for (const auto& [song, v] : table.entries) {
    out << song;
    for (double x : v) out << ',' << csv::format_double(x);
    out << "\n";
  }
}

Dataset assemble_dataset(const std::vector<EdaSignal>& signals,
                         const AnnotationSet& annotations,
                         const MusicFeatureTable& features) {
  // Sort by (subject,song) so the result is order-independent in its inputs.
  std::vector<const EdaSignal*> sorted;
  sorted.reserve(signals.size());
  for (const auto& s : signals) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EdaSignal* a, const EdaSignal* b) {
                     return std::tie(a->subject_id, a->song_id) <
                            std::tie(b->subject_id, b->song_id);
                   });
  Dataset ds;
  for (const EdaSignal* s : sorted) {
    SubjectSong key{s->subject_id, s->song_id};
    if (!annotations.entries.count(key)) {
      ds.skipped.emplace_back(key, "missing annotation");
      continue;
    }
    if (!features.entries.count(s->song_id)) {
      ds.skipped.emplace_back(key, "missing music vector");
      continue;
    }
    DatasetItem item;
    item.signal = *s;
    item.music_ref = s->song_id;
    ds.items.push_back(std::move(item));
    ds.subjects.insert(s->subject_id);
  }
  return ds;
}

}  // namespace resin

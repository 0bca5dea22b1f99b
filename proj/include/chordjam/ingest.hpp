#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "chordjam/music.hpp"

namespace chordjam {

enum class KeyMode { Major, Minor };

struct KeySegment {
  int start_bar = 0;
  PitchClass root;
  KeyMode mode = KeyMode::Major;

  friend bool operator==(const KeySegment&, const KeySegment&) = default;
};

/// Chord symbols written in one bar, in document order.
struct BarHarmony {
  int bar_index = 0;
  std::vector<Chord> chords;

  friend bool operator==(const BarHarmony&, const BarHarmony&) = default;
};

struct Score {
  std::string title;
  int divisions = 1;
  std::vector<KeySegment> key_segments;
  std::vector<Bar> bars;
  std::vector<BarHarmony> harmony;

  /// Chords annotated in `bar_index`, or an empty span.
  std::span<const Chord> harmony_at(int bar_index) const;
  /// Segment governing `bar_index` (the last one starting at or before it).
  const KeySegment* key_at(int bar_index) const;

  friend bool operator==(const Score&, const Score&) = default;
};

/// Throws ValidationError when bar indices are not strictly increasing or a
/// harmony entry addresses a missing bar.
void validate(const Score& score);

struct TrainingSequence {
  std::vector<Chord> chords;
  std::vector<PitchHistogram> histograms;

  std::size_t size() const { return chords.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::optional<int> bar_index = std::nullopt);
  std::optional<int> bar_index() const { return bar_index_; }

 private:
  std::optional<int> bar_index_;
};

/// Reads a partwise MusicXML document. The melody is the first part that has
/// notes; harmony symbols are collected from every part.
Score parse_musicxml(std::string_view document);
Score parse_musicxml_file(const std::filesystem::path& path);

/// Writes the score back as partwise MusicXML (one part, harmony at bar start).
std::string serialize_musicxml(const Score& score);

struct FilterPolicy {
  int max_chord_changes_per_bar = 1;
  bool allow_key_modulation = true;
  ChordVocabulary vocabulary{VocabularyMode::DiatonicC7};
};

struct FilterResult {
  std::optional<Score> accepted;
  std::string reason;

  explicit operator bool() const { return accepted.has_value(); }
};

/// Accepted scores come back transposed to C, ready for
/// to_training_sequence.
FilterResult filter_score(const Score& score, const FilterPolicy& policy);

Score transpose_to_c(const Score& score);

TrainingSequence to_training_sequence(const Score& score);

struct ManifestRecord {
  std::string path;
  bool accepted = false;
  std::string reason;
};

std::string to_json_line(const ManifestRecord& record);
ManifestRecord parse_manifest_line(std::string_view line);
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);

/// One song ready for training/evaluation: the transposed score and its
/// aligned sequence.
struct Song {
  std::string id;
  Score score;
  TrainingSequence sequence;
};

/// Loads every accepted entry of a manifest, re-applying `policy`. Relative
/// paths resolve against the manifest's directory.
std::vector<Song> load_corpus(const std::filesystem::path& manifest, const FilterPolicy& policy);

}  // namespace chordjam

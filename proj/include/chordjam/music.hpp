#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace chordjam {

/// Thrown when a value violates a domain precondition (out-of-range pitch,
/// unknown chord label, bad bias factor, ...).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Time in quarter-note units, relative to the start of the bar.
using QuarterTime = boost::rational<std::int64_t>;

class PitchClass {
 public:
  static constexpr int kCount = 12;

  PitchClass() = default;
  explicit PitchClass(int value);

  int value() const { return value_; }
  /// Sharp-spelled symbol: C, C#, D, ... B.
  std::string_view name() const;
  PitchClass transposed(int semitones) const;

  friend bool operator==(PitchClass, PitchClass) = default;
  friend auto operator<=>(PitchClass, PitchClass) = default;

 private:
  int value_ = 0;
};

/// Parses "C", "C#", "Db", "Bb", ... into a pitch class.
PitchClass parse_pitch_class(std::string_view name);

/// MIDI convention: 60 is middle C.
PitchClass pitch_class(int midi_pitch);

struct NoteEvent {
  int pitch = 60;
  QuarterTime onset{0};
  QuarterTime duration{1};
  int velocity = 64;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

/// Throws ValidationError unless pitch/velocity are MIDI-range, onset >= 0
/// and duration > 0.
void validate(const NoteEvent& note);

struct Bar {
  int index = 0;
  std::vector<NoteEvent> notes;

  bool silent() const { return notes.empty(); }
  friend bool operator==(const Bar&, const Bar&) = default;
};

struct PitchHistogram {
  std::array<double, PitchClass::kCount> mass{};
  bool silent = true;

  static PitchHistogram silence() { return {}; }
  /// Normalizes raw non-negative weights; an all-zero input yields silence.
  static PitchHistogram from_weights(std::span<const double, PitchClass::kCount> weights);
};

PitchHistogram bar_histogram(const Bar& bar);

enum class ChordQuality : std::uint8_t {
  Major = 0,
  Minor = 1,
  Augmented = 2,
  Diminished = 3,
  Suspended = 4,
};

inline constexpr int kQualityCount = 5;

std::string_view to_string(ChordQuality quality);
ChordQuality parse_quality(std::string_view name);

class Chord {
 public:
  static constexpr int kIdCount = PitchClass::kCount * kQualityCount;

  Chord() = default;
  Chord(PitchClass root, ChordQuality quality) : root_(root), quality_(quality) {}

  static Chord from_id(int id);
  /// Parses names such as "Cmajor", "F#minor", "Bdiminished".
  static Chord parse(std::string_view name);

  PitchClass root() const { return root_; }
  ChordQuality quality() const { return quality_; }
  int id() const { return root_.value() * kQualityCount + static_cast<int>(quality_); }
  std::string name() const;
  /// Root, third and fifth as pitch classes (suspended uses the fourth).
  std::array<PitchClass, 3> triad() const;
  Chord transposed(int semitones) const { return {root_.transposed(semitones), quality_}; }

  friend bool operator==(const Chord&, const Chord&) = default;
  friend bool operator<(const Chord& a, const Chord& b) { return a.id() < b.id(); }

 private:
  PitchClass root_;
  ChordQuality quality_ = ChordQuality::Major;
};

enum class VocabularyMode { Full60, DiatonicC7 };

std::string_view to_string(VocabularyMode mode);
/// Accepts "full60" and "diatonic7" (and the enum spellings).
VocabularyMode parse_vocabulary_mode(std::string_view name);

/// Hidden-state alphabet. States are indexed in ascending chord-id order.
class ChordVocabulary {
 public:
  explicit ChordVocabulary(VocabularyMode mode = VocabularyMode::DiatonicC7);

  VocabularyMode mode() const { return mode_; }
  std::size_t size() const { return chords_.size(); }
  std::span<const Chord> chords() const { return chords_; }
  const Chord& at(std::size_t state) const { return chords_.at(state); }
  std::optional<std::size_t> index_of(const Chord& chord) const;
  bool contains(const Chord& chord) const { return index_of(chord).has_value(); }

  friend bool operator==(const ChordVocabulary& a, const ChordVocabulary& b) { return a.mode_ == b.mode_; }

 private:
  VocabularyMode mode_;
  std::vector<Chord> chords_;
  std::array<int, Chord::kIdCount> state_of_id_{};
};

/// Maps a MusicXML <kind> label onto one of the five qualities, dropping
/// extensions and alterations. Throws UnknownChordKind for labels outside
/// the table.
Chord simplify_chord(PitchClass root, std::string_view kind_label,
                     std::span<const std::string> degree_alterations = {});

class UnknownChordKind : public ValidationError {
 public:
  explicit UnknownChordKind(std::string label);
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

}  // namespace chordjam

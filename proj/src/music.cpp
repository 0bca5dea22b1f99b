#include "chordjam/music.hpp"

#include <algorithm>
#include <numeric>

namespace chordjam {

namespace {

constexpr std::array<std::string_view, 12> kSharpNames = {
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"};

constexpr std::array<std::string_view, kQualityCount> kQualityNames = {
    "major", "minor", "augmented", "diminished", "suspended"};

int mod12(int v) { return ((v % 12) + 12) % 12; }

}  // namespace

PitchClass::PitchClass(int value) : value_(value) {
  if (value < 0 || value >= kCount) {
    throw ValidationError("pitch class out of range: " + std::to_string(value));
  }
}

std::string_view PitchClass::name() const { return kSharpNames[value_]; }

PitchClass PitchClass::transposed(int semitones) const { return PitchClass(mod12(value_ + semitones)); }

PitchClass parse_pitch_class(std::string_view name) {
  if (name.empty()) throw ValidationError("empty pitch class name");
  static constexpr std::array<int, 7> kNatural = {9, 11, 0, 2, 4, 5, 7};  // A..G
  const char step = name.front();
  if (step < 'A' || step > 'G') throw ValidationError("bad pitch class name: " + std::string(name));
  int value = kNatural[step - 'A'];
  for (char accidental : name.substr(1)) {
    if (accidental == '#') {
      ++value;
    } else if (accidental == 'b') {
      --value;
    } else {
      throw ValidationError("bad pitch class name: " + std::string(name));
    }
  }
  return PitchClass(mod12(value));
}

PitchClass pitch_class(int midi_pitch) {
  if (midi_pitch < 0 || midi_pitch > 127) {
    throw ValidationError("MIDI pitch out of range: " + std::to_string(midi_pitch));
  }
  return PitchClass(midi_pitch % 12);
}

void validate(const NoteEvent& note) {
  if (note.pitch < 0 || note.pitch > 127) throw ValidationError("note pitch out of range");
  if (note.velocity < 0 || note.velocity > 127) throw ValidationError("note velocity out of range");
  if (note.onset < 0) throw ValidationError("note onset is negative");
  if (note.duration <= 0) throw ValidationError("note duration must be positive");
}

PitchHistogram PitchHistogram::from_weights(std::span<const double, PitchClass::kCount> weights) {
  PitchHistogram h;
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0)) return h;
  for (int pc = 0; pc < PitchClass::kCount; ++pc) h.mass[pc] = weights[pc] / total;
  h.silent = false;
  return h;
}

PitchHistogram bar_histogram(const Bar& bar) {
  if (bar.silent()) return PitchHistogram::silence();
  // Exact rational accumulation, so the only rounding is the final division.
  std::array<QuarterTime, PitchClass::kCount> acc{};
  QuarterTime total{0};
  for (const auto& note : bar.notes) {
    acc[pitch_class(note.pitch).value()] += note.duration;
    total += note.duration;
  }
  PitchHistogram h;
  if (total <= 0) return h;
  for (int pc = 0; pc < PitchClass::kCount; ++pc) h.mass[pc] = boost::rational_cast<double>(acc[pc] / total);
  h.silent = false;
  return h;
}

std::string_view to_string(ChordQuality quality) { return kQualityNames[static_cast<int>(quality)]; }

ChordQuality parse_quality(std::string_view name) {
  for (int q = 0; q < kQualityCount; ++q) {
    if (kQualityNames[q] == name) return static_cast<ChordQuality>(q);
  }
  throw ValidationError("unknown chord quality: " + std::string(name));
}

Chord Chord::from_id(int id) {
  if (id < 0 || id >= kIdCount) throw ValidationError("chord id out of range: " + std::to_string(id));
  return {PitchClass(id / kQualityCount), static_cast<ChordQuality>(id % kQualityCount)};
}

Chord Chord::parse(std::string_view name) {
  std::size_t split = 1;
  while (split < name.size() && (name[split] == '#' || name[split] == 'b')) ++split;
  if (name.size() <= split) throw ValidationError("bad chord name: " + std::string(name));
  return {parse_pitch_class(name.substr(0, split)), parse_quality(name.substr(split))};
}

std::string Chord::name() const { return std::string(root_.name()) + std::string(to_string(quality_)); }

std::array<PitchClass, 3> Chord::triad() const {
  int third = 4;
  int fifth = 7;
  switch (quality_) {
    case ChordQuality::Major: break;
    case ChordQuality::Minor: third = 3; break;
    case ChordQuality::Augmented: fifth = 8; break;
    case ChordQuality::Diminished: third = 3; fifth = 6; break;
    case ChordQuality::Suspended: third = 5; break;
  }
  return {root_, root_.transposed(third), root_.transposed(fifth)};
}

std::string_view to_string(VocabularyMode mode) {
  return mode == VocabularyMode::Full60 ? "full60" : "diatonic7";
}

VocabularyMode parse_vocabulary_mode(std::string_view name) {
  if (name == "full60" || name == "Full60") return VocabularyMode::Full60;
  if (name == "diatonic7" || name == "DiatonicC7") return VocabularyMode::DiatonicC7;
  throw ValidationError("unknown vocabulary mode: " + std::string(name));
}

ChordVocabulary::ChordVocabulary(VocabularyMode mode) : mode_(mode) {
  if (mode == VocabularyMode::Full60) {
    for (int id = 0; id < Chord::kIdCount; ++id) chords_.push_back(Chord::from_id(id));
  } else {
    using Q = ChordQuality;
    chords_ = {{PitchClass(0), Q::Major},  {PitchClass(2), Q::Minor}, {PitchClass(4), Q::Minor},
               {PitchClass(5), Q::Major},  {PitchClass(7), Q::Major}, {PitchClass(9), Q::Minor},
               {PitchClass(11), Q::Diminished}};
  }
  state_of_id_.fill(-1);
  for (std::size_t i = 0; i < chords_.size(); ++i) state_of_id_[chords_[i].id()] = static_cast<int>(i);
}

std::optional<std::size_t> ChordVocabulary::index_of(const Chord& chord) const {
  const int state = state_of_id_[chord.id()];
  if (state < 0) return std::nullopt;
  return static_cast<std::size_t>(state);
}

UnknownChordKind::UnknownChordKind(std::string label)
    : ValidationError("unsupported chord kind: \"" + label + "\""), label_(std::move(label)) {}

Chord simplify_chord(PitchClass root, std::string_view kind_label, std::span<const std::string>) {
  using Q = ChordQuality;
  struct Entry {
    std::string_view kind;
    Q quality;
  };
  static constexpr std::array<Entry, 18> kTable = {{
      {"major", Q::Major},
      {"major-sixth", Q::Major},
      {"major-seventh", Q::Major},
      {"major-ninth", Q::Major},
      {"dominant", Q::Major},
      {"power", Q::Major},
      {"minor", Q::Minor},
      {"minor-sixth", Q::Minor},
      {"minor-seventh", Q::Minor},
      {"minor-ninth", Q::Minor},
      {"minor-major", Q::Minor},
      {"augmented", Q::Augmented},
      {"augmented-seventh", Q::Augmented},
      {"diminished", Q::Diminished},
      {"diminished-seventh", Q::Diminished},
      {"half-diminished", Q::Diminished},
      {"suspended-second", Q::Suspended},
      {"suspended-fourth", Q::Suspended},
  }};
  for (const auto& entry : kTable) {
    if (entry.kind == kind_label) return {root, entry.quality};
  }
  // dominant-seventh, dominant-ninth, dominant-11th, dominant-13th, ...
  if (kind_label.starts_with("dominant-")) return {root, Q::Major};
  throw UnknownChordKind(std::string(kind_label));
}

}  // namespace chordjam

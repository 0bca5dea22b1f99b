#include "chordjam/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <string>

namespace chordjam {

namespace {

bool has_smaller_period(const std::vector<Chord>& p) {
  const std::size_t n = p.size();
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    bool periodic = true;
    for (std::size_t i = d; i < n && periodic; ++i) periodic = p[i] == p[i - d];
    if (periodic) return true;
  }
  return false;
}

}  // namespace

void validate(const SynthSpec& spec) {
  if (spec.progression.size() < 2) throw ValidationError("synthetic progression needs period >= 2");
  if (spec.repetitions < 2) throw ValidationError("synthetic song needs repetitions >= 2");
  if (spec.notes_per_bar < 1) throw ValidationError("notes_per_bar must be >= 1");
  if (!(spec.profile_sharpness > 0.0 && spec.profile_sharpness <= 1.0)) {
    throw ValidationError("profile_sharpness must lie in (0,1]");
  }
}

SynthSong generate_song(const SynthSpec& spec) {
  validate(spec);
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution on_chord(spec.profile_sharpness);
  std::uniform_int_distribution<int> pick3(0, 2);
  std::uniform_int_distribution<int> pick_off(0, PitchClass::kCount - 4);
  std::uniform_int_distribution<int> octave(4, 5);

  SynthSong out;
  out.score.title = spec.title;
  out.score.divisions = spec.notes_per_bar;
  out.score.key_segments = {KeySegment{0, PitchClass(0), KeyMode::Major}};
  const QuarterTime note_length(4, spec.notes_per_bar);
  const int bars = static_cast<int>(spec.progression.size()) * spec.repetitions;
  for (int b = 0; b < bars; ++b) {
    const Chord& chord = spec.progression[b % spec.progression.size()];
    const auto triad = chord.triad();
    std::vector<int> off;
    for (int pc = 0; pc < PitchClass::kCount; ++pc) {
      if (std::find(triad.begin(), triad.end(), PitchClass(pc)) == triad.end()) off.push_back(pc);
    }
    Bar bar{.index = b, .notes = {}};
    for (int k = 0; k < spec.notes_per_bar; ++k) {
      int pc = chord.root().value();
      if (spec.style == MelodyStyle::Sampled) {
        pc = on_chord(rng) ? triad[pick3(rng)].value() : off[pick_off(rng) % off.size()];
      }
      const int pitch = (octave(rng) + 1) * 12 + pc;
      bar.notes.push_back({pitch, note_length * k, note_length, 80});
    }
    out.score.bars.push_back(std::move(bar));
    out.score.harmony.push_back({b, {chord}});
  }
  out.sequence = to_training_sequence(out.score);
  return out;
}

std::vector<Song> synth_corpus(const SynthCorpusSpec& spec) {
  if (spec.min_period < 2 || spec.max_period < spec.min_period) throw ValidationError("bad synthetic period range");
  const ChordVocabulary diatonic(VocabularyMode::DiatonicC7);
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> period(spec.min_period, spec.max_period);
  std::uniform_int_distribution<std::size_t> chord_pick(0, diatonic.size() - 1);
  std::vector<Song> songs;
  songs.reserve(spec.songs);
  for (int s = 0; s < spec.songs; ++s) {
    const int p = period(rng);
    std::vector<Chord> progression;
    do {
      progression.clear();
      for (int i = 0; i < p; ++i) {
        Chord c;
        do {
          c = diatonic.at(chord_pick(rng));
        } while (!progression.empty() && c == progression.back());
        progression.push_back(c);
      }
    } while (progression.front() == progression.back() || has_smaller_period(progression));

    SynthSpec song_spec;
    song_spec.progression = progression;
    song_spec.repetitions = spec.repetitions;
    song_spec.notes_per_bar = spec.notes_per_bar;
    song_spec.profile_sharpness = spec.profile_sharpness;
    song_spec.style = spec.style;
    song_spec.seed = rng();
    char name[32];
    std::snprintf(name, sizeof name, "synth-%03d", s);
    song_spec.title = name;
    auto generated = generate_song(song_spec);
    songs.push_back({name, std::move(generated.score), std::move(generated.sequence)});
  }
  return songs;
}

std::vector<Chord> twelve_bar_blues() {
  const Chord c(PitchClass(0), ChordQuality::Major);
  const Chord f(PitchClass(5), ChordQuality::Major);
  const Chord g(PitchClass(7), ChordQuality::Major);
  return {c, c, c, c, f, f, c, c, g, f, c, g};
}

}  // namespace chordjam

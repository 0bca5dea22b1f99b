#pragma once

#include <cstdint>
#include <vector>

#include "chordjam/ingest.hpp"
#include "chordjam/music.hpp"

namespace chordjam {

enum class MelodyStyle {
  Sampled,   // chord tones with probability `profile_sharpness`, else off-chord
  RootOnly,  // every note is the chord root (one-hot histograms)
};

struct SynthSpec {
  std::vector<Chord> progression;
  int repetitions = 4;
  int notes_per_bar = 8;
  double profile_sharpness = 0.9;
  std::uint64_t seed = 0;
  MelodyStyle style = MelodyStyle::Sampled;
  std::string title = "synthetic";
};

void validate(const SynthSpec& spec);

struct SynthSong {
  Score score;
  TrainingSequence sequence;
};

/// Deterministic for a given spec. The score is in C major, 4/4, one chord
/// symbol at the start of every bar and `notes_per_bar` equal notes per bar.
SynthSong generate_song(const SynthSpec& spec);

struct SynthCorpusSpec {
  int songs = 100;
  int min_period = 4;
  int max_period = 8;
  int repetitions = 8;
  int notes_per_bar = 8;
  double profile_sharpness = 0.9;
  MelodyStyle style = MelodyStyle::Sampled;
  std::uint64_t seed = 42;
};

/// Random diatonic progressions (no chord repeated back to back, minimal
/// period equal to the drawn length) rendered with generate_song.
std::vector<Song> synth_corpus(const SynthCorpusSpec& spec);

std::vector<Chord> twelve_bar_blues();

}  // namespace chordjam

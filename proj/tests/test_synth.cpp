#include <doctest.h>

#include <algorithm>

#include "chordjam/synth.hpp"

using namespace chordjam;

namespace {

bool on_triad(const Chord& c, int pc) {
  const auto t = c.triad();
  return std::find(t.begin(), t.end(), PitchClass(pc)) != t.end();
}

std::size_t minimal_period(const std::vector<Chord>& chords) {
  std::size_t p = 1;
  while (!std::equal(chords.begin() + p, chords.end(), chords.begin())) ++p;
  return p;
}

}  // namespace

TEST_CASE("sharpness 1 keeps every note on the triad") {
  SynthSpec spec;
  spec.progression = twelve_bar_blues();
  spec.repetitions = 4;
  spec.profile_sharpness = 1.0;
  spec.seed = 3;
  const auto song = generate_song(spec);
  REQUIRE(song.sequence.size() == 48);
  for (std::size_t b = 0; b < song.sequence.size(); ++b) {
    const auto& h = song.sequence.histograms[b];
    CHECK_FALSE(h.silent);
    for (int pc = 0; pc < 12; ++pc) {
      if (h.mass[pc] > 0) CHECK(on_triad(song.sequence.chords[b], pc));
    }
  }
}

TEST_CASE("seeds change notes but not chords") {
  SynthSpec spec;
  spec.progression = twelve_bar_blues();
  spec.seed = 1;
  const auto a = generate_song(spec);
  spec.seed = 2;
  const auto b = generate_song(spec);
  CHECK(a.sequence.chords == b.sequence.chords);
  CHECK(a.score.bars != b.score.bars);
  spec.seed = 1;
  CHECK(generate_song(spec).score == a.score);
}

TEST_CASE("on-triad note fraction follows the sharpness") {
  SynthSpec spec;
  spec.progression = twelve_bar_blues();
  spec.repetitions = 10000 / 12 + 1;
  spec.profile_sharpness = 0.9;
  spec.seed = 11;
  const auto song = generate_song(spec);
  std::size_t on = 0, total = 0;
  for (std::size_t b = 0; b < 10000; ++b) {
    const auto& chord = song.sequence.chords[b];
    for (const auto& note : song.score.bars[b].notes) {
      on += on_triad(chord, pitch_class(note.pitch).value());
      ++total;
    }
  }
  CHECK(std::abs(double(on) / double(total) - 0.9) <= 0.01);
}

TEST_CASE("root-only melodies give one-hot histograms") {
  SynthSpec spec;
  spec.progression = {Chord::parse("Cmajor"), Chord::parse("Aminor"), Chord::parse("Bdiminished")};
  spec.style = MelodyStyle::RootOnly;
  const auto song = generate_song(spec);
  for (std::size_t b = 0; b < song.sequence.size(); ++b) {
    CHECK(song.sequence.histograms[b].mass[song.sequence.chords[b].root().value()] == 1.0);
  }
}

TEST_CASE("generated scores are accepted and round-trip their chords") {
  SynthSpec spec;
  spec.progression = twelve_bar_blues();
  spec.repetitions = 3;
  const auto song = generate_song(spec);
  const auto r = filter_score(song.score, FilterPolicy{});
  REQUIRE(r);
  std::vector<Chord> expected;
  for (int rep = 0; rep < 3; ++rep) expected.insert(expected.end(), spec.progression.begin(), spec.progression.end());
  CHECK(to_training_sequence(*r.accepted).chords == expected);
  CHECK(song.sequence.chords == expected);
}

TEST_CASE("synthetic corpus progressions") {
  SynthCorpusSpec spec;
  spec.songs = 100;
  const auto corpus = synth_corpus(spec);
  REQUIRE(corpus.size() == 100);
  CHECK(corpus[7].id == "synth-007");
  for (const auto& song : corpus) {
    const auto& chords = song.sequence.chords;
    const auto p = minimal_period(chords);
    CHECK(p >= 4);
    CHECK(p <= 8);
    CHECK(chords.size() == p * 8);
    for (std::size_t t = 1; t < chords.size(); ++t) CHECK(chords[t] != chords[t - 1]);
    CHECK(filter_score(song.score, FilterPolicy{}));
  }
  // Deterministic for a seed.
  const auto again = synth_corpus(spec);
  for (std::size_t i = 0; i < corpus.size(); ++i) CHECK(again[i].score == corpus[i].score);
}

TEST_CASE("invalid specs") {
  SynthSpec spec;
  spec.progression = {Chord::parse("Cmajor")};
  CHECK_THROWS_AS(generate_song(spec), ValidationError);
  spec.progression = twelve_bar_blues();
  spec.profile_sharpness = 0.0;
  CHECK_THROWS_AS(generate_song(spec), ValidationError);
  SynthCorpusSpec bad;
  bad.min_period = 6;
  bad.max_period = 4;
  CHECK_THROWS_AS(synth_corpus(bad), ValidationError);
}

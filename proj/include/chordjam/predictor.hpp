#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "chordjam/ingest.hpp"
#include "chordjam/model.hpp"
#include "chordjam/viterbi.hpp"
#include "chordjam/vom.hpp"

namespace chordjam {

enum class PredictionSource { Vom, Fallback };

std::string_view to_string(PredictionSource source);

/// argmax_i A[last -> i], ties to the lowest chord id.
Chord fallback_transition(const Chord& last_chord, const HmmModel& model);

struct SessionConfig {
  double alpha = 0.5;
  std::size_t max_context_depth = 0;  // 0 = unbounded
};

struct BarPrediction {
  int bar_index = 0;
  Chord inferred;    // last chord of the Viterbi path after this bar
  Chord predicted;   // chord proposed for the next bar
  PredictionSource source = PredictionSource::Fallback;
  double latency_ms = 0.0;
};

struct LatencySample {
  int bar_index = 0;
  double milliseconds = 0.0;
};

/// One live accompaniment session: per bar, decode the whole history, query
/// the VOM with the decoded chords, fall back to the corpus transition
/// matrix on a miss, then retrain the VOM on the decoded sequence.
class Session {
 public:
  Session(std::shared_ptr<const HmmModel> model, SessionConfig config = {});

  BarPrediction next_chord_prediction(const PitchHistogram& bar);

  /// First-order baseline: fallback_transition on the last inferred chord,
  /// never consulting the VOM. Requires at least one processed bar.
  Chord baseline_markov1() const;

  const ObservationHistory& history() const { return history_; }
  const std::vector<Chord>& inferred() const { return inferred_; }
  const VomTree& tree() const { return tree_; }
  const HmmModel& model() const { return *model_; }
  const SessionConfig& config() const { return config_; }
  std::size_t bar_count() const { return history_.size(); }
  const std::vector<LatencySample>& latency_log() const { return latency_log_; }

 private:
  std::shared_ptr<const HmmModel> model_;
  Decoder decoder_;
  SessionConfig config_;
  ObservationHistory history_;
  std::vector<Chord> inferred_;
  VomTree tree_;
  std::vector<LatencySample> latency_log_;
};

/// Blended next-note estimate used by the BayesianBand incremental update:
/// (p_corpus + a*L*triple/pair) / (1 + a*L), L = ln(pair), with L clamped to
/// 0 when pair < 2.
double blend_note_probability(double p_corpus, double novelty, double pair_count, double triple_count);

/// A note-level melody, pitch classes in onset order, with the bar each note
/// belongs to.
struct NoteStream {
  std::vector<int> pitch_classes;
  std::vector<int> bar_of_note;
};

NoteStream note_stream(const Score& score);

/// Re-implementation of the BayesianBand predictor over the 7 diatonic
/// chords: a corpus note trigram with in-session incremental update, and a
/// chord table P(c[t+1] | n[t+1], c[t], c[t-1]).
class BayesianBand {
 public:
  static constexpr std::size_t kNotes = PitchClass::kCount;
  static constexpr std::size_t kChords = 7;

  BayesianBand(std::span<const Song> corpus, double novelty = 1.0, double smoothing = kDefaultSmoothing);

  double novelty() const { return novelty_; }
  const ChordVocabulary& vocabulary() const { return vocabulary_; }

  /// P_corpus(next | prev2, prev1).
  double corpus_note_probability(int prev2, int prev1, int next) const;
  double session_note_probability(int prev2, int prev1, int next) const;
  /// P(c[t+1] = chord | n[t+1] = note, c[t] = current, c[t-1] = previous).
  double chord_probability(std::size_t previous, std::size_t current, int note, std::size_t chord) const;

  /// argmax_o of the blended note estimate.
  int predict_note(int prev2, int prev1) const;

  /// Predicts the next note from `notes` (last two pitch classes) and returns
  /// the chord maximizing the chord table given that note and `chords` (last
  /// two chords). Shorter histories fall back to the corpus-frequency argmax.
  Chord predict_chord(std::span<const int> notes, std::span<const Chord> chords) const;

  /// Records the last element of `notes` as the continuation of the two
  /// before it (no-op with fewer than three notes).
  void observe(std::span<const int> notes);
  void reset_session();

  std::size_t pair_count(int a, int b) const { return pair_counts_[a * kNotes + b]; }
  std::size_t triple_count(int a, int b, int c) const { return triple_counts_[(a * kNotes + b) * kNotes + c]; }

 private:
  ChordVocabulary vocabulary_{VocabularyMode::DiatonicC7};
  double novelty_;
  std::vector<double> note_trigram_;  // [prev2][prev1][next]
  std::vector<double> chord_table_;   // [previous][current][note][next chord]
  std::vector<double> chord_prior_;
  std::vector<std::size_t> pair_counts_;
  std::vector<std::size_t> triple_counts_;
};

/// Free-function form: predict the chord, then fold the realized note into
/// the session counts.
Chord bb_update_and_predict(BayesianBand& bb, std::span<const int> note_history, std::span<const Chord> chord_history,
                            std::optional<int> realized_note = std::nullopt);

}  // namespace chordjam

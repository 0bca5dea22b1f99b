#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chordjam/ingest.hpp"
#include "chordjam/model.hpp"
#include "chordjam/predictor.hpp"
#include "chordjam/stats.hpp"

namespace chordjam {

enum class Setting { HmmInference, HmmVom60, HmmVom7, HalfHalf, TransitionOnly, BayesianBand };

std::string_view to_string(Setting setting);
Setting parse_setting(std::string_view name);
std::span<const Setting> all_settings();
VocabularyMode default_vocabulary(Setting setting);

/// Fraction of positions where the two sequences agree.
double accuracy(std::span<const Chord> truth, std::span<const Chord> predictions);

struct EvalOptions {
  double alpha = 0.5;
  double epsilon = kDefaultSmoothing;
  double bb_novelty = 1.0;
  std::optional<VocabularyMode> vocabulary;  // overrides default_vocabulary
  bool parallel = true;
};

struct SongScore {
  std::string song_id;
  double accuracy = 0.0;
  std::optional<double> first_half;
  std::optional<double> second_half;
};

struct EvalReport {
  Setting setting = Setting::HmmVom7;
  VocabularyMode vocabulary = VocabularyMode::DiatonicC7;
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::vector<SongScore> per_song;  // sorted by song id
  double mean_accuracy = 0.0;       // mean over per_song
  std::vector<double> fold_means;
  double mean_of_fold_means = 0.0;
  double runtime_ms = 0.0;
  std::vector<std::string> warnings;

  std::vector<double> accuracies() const;
  std::vector<double> first_halves() const;
  std::vector<double> second_halves() const;
};

/// Viterbi path over the whole song (scored bar by bar against the truth).
std::vector<Chord> inference_path(const HmmModel& model, const TrainingSequence& song, double alpha);

/// Predictions made while streaming the song bar by bar; element t-1 is the
/// chord proposed for bar t (so the result has T-1 entries).
std::vector<Chord> hybrid_predictions(std::shared_ptr<const HmmModel> model, const TrainingSequence& song,
                                      double alpha);
std::vector<Chord> transition_predictions(std::shared_ptr<const HmmModel> model, const TrainingSequence& song,
                                          double alpha);
/// BayesianBand plays its own chords, so its chord history is its previous
/// predictions.
std::vector<Chord> bayesian_band_predictions(BayesianBand& bb, const Song& song);

struct HalfScores {
  double first = 0.0;
  double second = 0.0;
};

/// Splits next-bar predictions at bar T/2: first covers target bars [1, T/2),
/// second covers [T/2, T). Needs T >= 4.
HalfScores half_half_scores(std::span<const Chord> truth, std::span<const Chord> predictions);

/// Seeded shuffle, k near-equal folds, train on k-1 folds, score the held-out
/// songs. Songs outside the setting's vocabulary are dropped with a warning.
EvalReport cross_validate(std::span<const Song> corpus, std::size_t k, Setting setting, std::uint64_t seed,
                          const EvalOptions& options = {});

/// Per-song first/second-half accuracies of the hybrid engine under k-fold CV.
struct HalfHalfResult {
  std::vector<double> first;
  std::vector<double> second;
  std::vector<std::string> warnings;
};
HalfHalfResult half_half(std::span<const Song> corpus, std::size_t k, std::uint64_t seed, const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report);
/// Setting / vocabulary / accuracy table.
std::string format_results_table(std::span<const EvalReport> reports);

struct LatencyReport {
  std::size_t bars = 0;
  std::size_t repetitions = 0;
  VocabularyMode vocabulary = VocabularyMode::DiatonicC7;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double max_ms = 0.0;
  std::vector<double> mean_curve_ms;  // mean latency per bar index
};

/// Drives Session::next_chord_prediction with synthetic bars and collects the
/// per-bar wall-clock latency.
LatencyReport latency_benchmark(std::size_t session_length_bars, VocabularyMode vocabulary, std::size_t repetitions,
                                std::uint64_t seed = 7);

std::string latency_to_json(const LatencyReport& report);

/// Nearest-rank percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

}  // namespace chordjam

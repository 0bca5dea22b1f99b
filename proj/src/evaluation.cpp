#include "chordjam/evaluation.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <future>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chordjam/synth.hpp"

namespace chordjam {

namespace {

constexpr std::array<Setting, 6> kSettings = {Setting::HmmInference,   Setting::HmmVom60,
                                              Setting::HmmVom7,        Setting::HalfHalf,
                                              Setting::TransitionOnly, Setting::BayesianBand};

bool in_vocabulary(const Song& song, const ChordVocabulary& vocab) {
  return std::all_of(song.sequence.chords.begin(), song.sequence.chords.end(),
                     [&](const Chord& c) { return vocab.contains(c); });
}

struct FoldOutcome {
  std::vector<SongScore> scores;
  std::vector<std::string> warnings;
};

FoldOutcome evaluate_fold(std::span<const Song> corpus, std::span<const std::size_t> test,
                          std::span<const std::size_t> train, Setting setting, const ChordVocabulary& vocab,
                          const EvalOptions& options) {
  std::vector<TrainingSequence> train_seqs;
  std::vector<Song> train_songs;
  for (std::size_t i : train) {
    train_seqs.push_back(corpus[i].sequence);
    if (setting == Setting::BayesianBand) train_songs.push_back(corpus[i]);
  }
  auto model = std::make_shared<const HmmModel>(train_model(train_seqs, vocab, options.epsilon));
  std::optional<BayesianBand> bb;
  if (setting == Setting::BayesianBand) bb.emplace(train_songs, options.bb_novelty, options.epsilon);

  FoldOutcome out;
  for (std::size_t i : test) {
    const Song& song = corpus[i];
    const auto& truth = song.sequence.chords;
    SongScore score{song.id, 0.0, std::nullopt, std::nullopt};
    switch (setting) {
      case Setting::HmmInference:
        score.accuracy = accuracy(truth, inference_path(*model, song.sequence, options.alpha));
        break;
      case Setting::HmmVom60:
      case Setting::HmmVom7:
        score.accuracy = accuracy(std::span(truth).subspan(1), hybrid_predictions(model, song.sequence, options.alpha));
        break;
      case Setting::HalfHalf: {
        if (truth.size() < 4) {
          out.warnings.push_back(song.id + ": skipped, fewer than 4 bars");
          continue;
        }
        const auto predictions = hybrid_predictions(model, song.sequence, options.alpha);
        const auto halves = half_half_scores(truth, predictions);
        score.accuracy = accuracy(std::span(truth).subspan(1), predictions);
        score.first_half = halves.first;
        score.second_half = halves.second;
        break;
      }
      case Setting::TransitionOnly:
        score.accuracy =
            accuracy(std::span(truth).subspan(1), transition_predictions(model, song.sequence, options.alpha));
        break;
      case Setting::BayesianBand:
        bb->reset_session();
        score.accuracy = accuracy(std::span(truth).subspan(1), bayesian_band_predictions(*bb, song));
        break;
    }
    out.scores.push_back(std::move(score));
  }
  return out;
}

}  // namespace

std::string_view to_string(Setting setting) {
  switch (setting) {
    case Setting::HmmInference: return "hmm_inference";
    case Setting::HmmVom60: return "hmm_vom_60";
    case Setting::HmmVom7: return "hmm_vom_7";
    case Setting::HalfHalf: return "half_half";
    case Setting::TransitionOnly: return "transition_only";
    case Setting::BayesianBand: return "bayesian_band";
  }
  return "unknown";
}

Setting parse_setting(std::string_view name) {
  for (Setting s : kSettings) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown setting: " + std::string(name));
}

std::span<const Setting> all_settings() { return kSettings; }

VocabularyMode default_vocabulary(Setting setting) {
  return setting == Setting::HmmVom60 ? VocabularyMode::Full60 : VocabularyMode::DiatonicC7;
}

double accuracy(std::span<const Chord> truth, std::span<const Chord> predictions) {
  if (truth.size() != predictions.size()) {
    throw ValidationError("accuracy: length mismatch (" + std::to_string(truth.size()) + " vs " +
                          std::to_string(predictions.size()) + ")");
  }
  if (truth.empty()) throw ValidationError("accuracy of empty sequences");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predictions[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::vector<double> EvalReport::accuracies() const {
  std::vector<double> out;
  for (const auto& s : per_song) out.push_back(s.accuracy);
  return out;
}

std::vector<double> EvalReport::first_halves() const {
  std::vector<double> out;
  for (const auto& s : per_song) {
    if (s.first_half) out.push_back(*s.first_half);
  }
  return out;
}

std::vector<double> EvalReport::second_halves() const {
  std::vector<double> out;
  for (const auto& s : per_song) {
    if (s.second_half) out.push_back(*s.second_half);
  }
  return out;
}

std::vector<Chord> inference_path(const HmmModel& model, const TrainingSequence& song, double alpha) {
  return viterbi(song.histograms, model, alpha).path;
}

std::vector<Chord> hybrid_predictions(std::shared_ptr<const HmmModel> model, const TrainingSequence& song,
                                      double alpha) {
  Session session(std::move(model), SessionConfig{alpha, 0});
  std::vector<Chord> out;
  for (std::size_t t = 0; t + 1 < song.size(); ++t) out.push_back(session.next_chord_prediction(song.histograms[t]).predicted);
  return out;
}

std::vector<Chord> transition_predictions(std::shared_ptr<const HmmModel> model, const TrainingSequence& song,
                                          double alpha) {
  const Decoder decoder(*model);
  ObservationHistory history;
  std::vector<Chord> out;
  for (std::size_t t = 0; t + 1 < song.size(); ++t) {
    history.push_back(song.histograms[t]);
    const auto path = decoder.decode(history, alpha).path;
    out.push_back(fallback_transition(path.back(), *model));
  }
  return out;
}

std::vector<Chord> bayesian_band_predictions(BayesianBand& bb, const Song& song) {
  const auto stream = note_stream(song.score);
  const std::size_t bars = song.sequence.size();
  std::vector<int> heard;
  std::vector<Chord> played;
  std::size_t next_note = 0;
  // Chord for bar 0 is the corpus-frequency choice.
  played.push_back(bb.predict_chord({}, {}));
  std::vector<Chord> out;
  for (std::size_t t = 0; t + 1 < bars; ++t) {
    while (next_note < stream.pitch_classes.size() && stream.bar_of_note[next_note] <= static_cast<int>(t)) {
      heard.push_back(stream.pitch_classes[next_note++]);
      bb.observe(heard);
    }
    const Chord next = bb.predict_chord(heard, played);
    played.push_back(next);
    out.push_back(next);
  }
  return out;
}

HalfScores half_half_scores(std::span<const Chord> truth, std::span<const Chord> predictions) {
  const std::size_t bars = truth.size();
  if (bars < 4) throw ValidationError("half/half split needs at least 4 bars");
  if (predictions.size() + 1 != bars) throw ValidationError("half/half: expected T-1 predictions");
  const std::size_t half = bars / 2;
  HalfScores out;
  out.first = accuracy(truth.subspan(1, half - 1), predictions.subspan(0, half - 1));
  out.second = accuracy(truth.subspan(half), predictions.subspan(half - 1));
  return out;
}

EvalReport cross_validate(std::span<const Song> corpus, std::size_t k, Setting setting, std::uint64_t seed,
                          const EvalOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  if (k < 2) throw ValidationError("cross-validation needs k >= 2");
  validate_alpha(options.alpha);
  EvalReport report;
  report.setting = setting;
  report.vocabulary = options.vocabulary.value_or(default_vocabulary(setting));
  report.folds = k;
  report.seed = seed;
  const ChordVocabulary vocab(report.vocabulary);
  if (setting == Setting::BayesianBand && vocab.mode() != VocabularyMode::DiatonicC7) {
    throw ValidationError("bayesian_band runs on the diatonic7 vocabulary only");
  }

  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (in_vocabulary(corpus[i], vocab)) {
      usable.push_back(i);
    } else {
      report.warnings.push_back(corpus[i].id + ": skipped, chords outside " + std::string(to_string(vocab.mode())));
    }
  }
  if (usable.size() < k) {
    throw ValidationError("corpus has " + std::to_string(usable.size()) + " usable songs, fewer than k=" +
                          std::to_string(k));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(usable.begin(), usable.end(), rng);

  const std::size_t n = usable.size();
  std::vector<std::vector<std::size_t>> test(k), train(k);
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t lo = f * n / k;
    const std::size_t hi = (f + 1) * n / k;
    for (std::size_t j = 0; j < n; ++j) (j >= lo && j < hi ? test[f] : train[f]).push_back(usable[j]);
  }

  std::vector<FoldOutcome> outcomes(k);
  if (options.parallel) {
    std::vector<std::future<FoldOutcome>> futures;
    for (std::size_t f = 0; f < k; ++f) {
      futures.push_back(std::async(std::launch::async, evaluate_fold, corpus, std::span<const std::size_t>(test[f]),
                                   std::span<const std::size_t>(train[f]), setting, std::cref(vocab),
                                   std::cref(options)));
    }
    for (std::size_t f = 0; f < k; ++f) outcomes[f] = futures[f].get();
  } else {
    for (std::size_t f = 0; f < k; ++f) outcomes[f] = evaluate_fold(corpus, test[f], train[f], setting, vocab, options);
  }

  for (auto& outcome : outcomes) {
    if (!outcome.scores.empty()) {
      double total = 0.0;
      for (const auto& s : outcome.scores) total += s.accuracy;
      report.fold_means.push_back(total / static_cast<double>(outcome.scores.size()));
    }
    report.per_song.insert(report.per_song.end(), outcome.scores.begin(), outcome.scores.end());
    report.warnings.insert(report.warnings.end(), outcome.warnings.begin(), outcome.warnings.end());
  }
  std::sort(report.per_song.begin(), report.per_song.end(),
            [](const SongScore& a, const SongScore& b) { return a.song_id < b.song_id; });
  if (report.per_song.empty()) throw ValidationError("no song could be evaluated");
  report.mean_accuracy = stats::mean(report.accuracies());
  report.mean_of_fold_means = stats::mean(report.fold_means);
  report.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return report;
}

HalfHalfResult half_half(std::span<const Song> corpus, std::size_t k, std::uint64_t seed, const EvalOptions& options) {
  const auto report = cross_validate(corpus, k, Setting::HalfHalf, seed, options);
  return {report.first_halves(), report.second_halves(), report.warnings};
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["setting"] = std::string(to_string(report.setting));
  j["vocabulary"] = std::string(to_string(report.vocabulary));
  j["folds"] = report.folds;
  j["seed"] = report.seed;
  j["songs"] = report.per_song.size();
  j["mean_accuracy"] = report.mean_accuracy;
  j["mean_of_fold_means"] = report.mean_of_fold_means;
  j["fold_means"] = report.fold_means;
  j["runtime_ms"] = report.runtime_ms;
  auto songs = nlohmann::ordered_json::array();
  for (const auto& s : report.per_song) {
    nlohmann::ordered_json row;
    row["song_id"] = s.song_id;
    row["accuracy"] = s.accuracy;
    if (s.first_half) row["first_half"] = *s.first_half;
    if (s.second_half) row["second_half"] = *s.second_half;
    songs.push_back(row);
  }
  j["per_song"] = songs;
  if (report.setting == Setting::HalfHalf && report.per_song.size() >= 2) {
    const auto first = report.first_halves();
    const auto second = report.second_halves();
    j["mean_first_half"] = stats::mean(first);
    j["mean_second_half"] = stats::mean(second);
    try {
      const auto t = stats::paired_t_test_one_sided(second, first);
      j["t_test_second_gt_first"] = {{"t", t.t_statistic}, {"df", t.degrees_of_freedom}, {"p", t.p_value_one_sided}};
    } catch (const stats::DegenerateSample&) {
      j["t_test_second_gt_first"] = nullptr;
    }
  }
  j["warnings"] = report.warnings;
  return j.dump(2) + "\n";
}

std::string format_results_table(std::span<const EvalReport> reports) {
  std::ostringstream os;
  os << std::left << std::setw(18) << "Setting" << std::setw(12) << "Chords" << std::right << std::setw(14)
     << "Accuracy (%)" << "\n";
  os << std::string(44, '-') << "\n";
  for (const auto& r : reports) {
    const std::string chords = r.vocabulary == VocabularyMode::Full60 ? "60" : "7";
    if (r.setting == Setting::HalfHalf) {
      os << std::left << std::setw(18) << "half_half (1st)" << std::setw(12) << chords << std::right << std::setw(14)
         << std::fixed << std::setprecision(2) << 100.0 * stats::mean(r.first_halves()) << "\n";
      os << std::left << std::setw(18) << "half_half (2nd)" << std::setw(12) << chords << std::right << std::setw(14)
         << std::fixed << std::setprecision(2) << 100.0 * stats::mean(r.second_halves()) << "\n";
      continue;
    }
    const std::string label = r.setting == Setting::BayesianBand ? "bayesian_band*" : std::string(to_string(r.setting));
    os << std::left << std::setw(18) << label << std::setw(12) << chords << std::right << std::setw(14) << std::fixed
       << std::setprecision(2) << 100.0 * r.mean_accuracy << "\n";
  }
  const bool has_bb = std::any_of(reports.begin(), reports.end(),
                                  [](const EvalReport& r) { return r.setting == Setting::BayesianBand; });
  if (has_bb) os << "* bb-reimpl: BayesianBand re-implementation trained on this corpus\n";
  return os.str();
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw ValidationError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double rank = std::ceil(q / 100.0 * static_cast<double>(values.size()));
  const std::size_t idx = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  return values[std::min(idx, values.size() - 1)];
}

LatencyReport latency_benchmark(std::size_t session_length_bars, VocabularyMode vocabulary, std::size_t repetitions,
                                std::uint64_t seed) {
  if (session_length_bars == 0 || repetitions == 0) throw ValidationError("latency benchmark needs bars and repetitions");
  SynthCorpusSpec corpus_spec;
  corpus_spec.songs = 40;
  corpus_spec.seed = seed;
  const auto corpus = synth_corpus(corpus_spec);
  std::vector<TrainingSequence> seqs;
  for (const auto& s : corpus) seqs.push_back(s.sequence);
  auto model = std::make_shared<const HmmModel>(train_model(seqs, ChordVocabulary(vocabulary)));

  LatencyReport report;
  report.bars = session_length_bars;
  report.repetitions = repetitions;
  report.vocabulary = vocabulary;
  report.mean_curve_ms.assign(session_length_bars, 0.0);
  std::vector<double> samples;
  const ChordVocabulary diatonic(VocabularyMode::DiatonicC7);
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    SynthSpec spec;
    spec.progression = {diatonic.at(0), diatonic.at(5), diatonic.at(1), diatonic.at(4),
                        diatonic.at(0), diatonic.at(3), diatonic.at(4), diatonic.at(2)};
    spec.repetitions = static_cast<int>((session_length_bars + spec.progression.size() - 1) / spec.progression.size()) + 1;
    spec.seed = seed + rep + 1;
    const auto song = generate_song(spec);
    Session session(model);
    for (std::size_t t = 0; t < session_length_bars; ++t) {
      const double ms = session.next_chord_prediction(song.sequence.histograms[t]).latency_ms;
      samples.push_back(ms);
      report.mean_curve_ms[t] += ms / static_cast<double>(repetitions);
    }
  }
  report.p50_ms = percentile(samples, 50);
  report.p95_ms = percentile(samples, 95);
  report.max_ms = *std::max_element(samples.begin(), samples.end());
  return report;
}

std::string latency_to_json(const LatencyReport& report) {
  nlohmann::ordered_json j;
  j["bars"] = report.bars;
  j["repetitions"] = report.repetitions;
  j["vocabulary"] = std::string(to_string(report.vocabulary));
  j["p50_ms"] = report.p50_ms;
  j["p95_ms"] = report.p95_ms;
  j["max_ms"] = report.max_ms;
  j["mean_curve_ms"] = report.mean_curve_ms;
  return j.dump(2) + "\n";
}

}  // namespace chordjam

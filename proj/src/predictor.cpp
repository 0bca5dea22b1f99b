#include "chordjam/predictor.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

namespace chordjam {

std::string_view to_string(PredictionSource source) { return source == PredictionSource::Vom ? "vom" : "fallback"; }

Chord fallback_transition(const Chord& last_chord, const HmmModel& model) {
  const auto from = model.vocabulary.index_of(last_chord);
  if (!from) throw ValidationError("chord " + last_chord.name() + " is not in the model vocabulary");
  const auto row = model.transitions.row(*from);
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return model.vocabulary.at(best);
}

namespace {

std::shared_ptr<const HmmModel> require_model(std::shared_ptr<const HmmModel> model) {
  if (!model) throw std::invalid_argument("session requires a loaded model");
  return model;
}

}  // namespace

Session::Session(std::shared_ptr<const HmmModel> model, SessionConfig config)
    : model_(require_model(std::move(model))),
      decoder_(*model_),
      config_(config),
      tree_(config.max_context_depth) {
  validate_alpha(config_.alpha);
}

BarPrediction Session::next_chord_prediction(const PitchHistogram& bar) {
  const auto start = std::chrono::steady_clock::now();
  history_.push_back(bar);
  auto decoded = decoder_.decode(history_, config_.alpha);
  inferred_ = std::move(decoded.path);

  std::vector<VomTree::Symbol> symbols;
  symbols.reserve(inferred_.size());
  for (const auto& chord : inferred_) symbols.push_back(chord.id());

  BarPrediction out;
  out.bar_index = static_cast<int>(history_.size()) - 1;
  out.inferred = inferred_.back();
  if (const auto dist = tree_.query(symbols)) {
    out.predicted = Chord::from_id(dist->argmax());
    out.source = PredictionSource::Vom;
  } else {
    out.predicted = fallback_transition(inferred_.back(), *model_);
    out.source = PredictionSource::Fallback;
  }

  // The decoded past can change after every bar, so the tree is rebuilt from
  // the current path instead of appended to.
  tree_.clear();
  tree_.learn_sequence(symbols);

  out.latency_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  latency_log_.push_back({out.bar_index, out.latency_ms});
  return out;
}

Chord Session::baseline_markov1() const {
  if (inferred_.empty()) throw std::logic_error("baseline_markov1 needs at least one processed bar");
  return fallback_transition(inferred_.back(), *model_);
}

double blend_note_probability(double p_corpus, double novelty, double pair_count, double triple_count) {
  const double weight = pair_count < 2.0 ? 0.0 : novelty * std::log(pair_count);
  if (weight == 0.0) return p_corpus;
  return (p_corpus + weight * (triple_count / pair_count)) / (1.0 + weight);
}

NoteStream note_stream(const Score& score) {
  NoteStream out;
  for (const auto& bar : score.bars) {
    for (const auto& note : bar.notes) {
      out.pitch_classes.push_back(pitch_class(note.pitch).value());
      out.bar_of_note.push_back(bar.index);
    }
  }
  return out;
}

namespace {

void normalize_blocks(std::vector<double>& values, std::size_t block, double smoothing) {
  for (std::size_t start = 0; start < values.size(); start += block) {
    double total = 0.0;
    for (std::size_t i = start; i < start + block; ++i) total += (values[i] += smoothing);
    for (std::size_t i = start; i < start + block; ++i) {
      values[i] = total > 0.0 ? values[i] / total : 1.0 / static_cast<double>(block);
    }
  }
}

}  // namespace

BayesianBand::BayesianBand(std::span<const Song> corpus, double novelty, double smoothing)
    : novelty_(novelty),
      note_trigram_(kNotes * kNotes * kNotes, 0.0),
      chord_table_(kChords * kChords * kNotes * kChords, 0.0),
      chord_prior_(kChords, 0.0),
      pair_counts_(kNotes * kNotes, 0),
      triple_counts_(kNotes * kNotes * kNotes, 0) {
  if (novelty < 0.0) throw ValidationError("BayesianBand novelty must be non-negative");
  auto state = [&](const Chord& c) {
    const auto s = vocabulary_.index_of(c);
    if (!s) throw ValidationError("BayesianBand supports the diatonic vocabulary only; got " + c.name());
    return *s;
  };
  for (const auto& song : corpus) {
    const auto stream = note_stream(song.score);
    const auto& pcs = stream.pitch_classes;
    for (std::size_t i = 2; i < pcs.size(); ++i) note_trigram_[(pcs[i - 2] * kNotes + pcs[i - 1]) * kNotes + pcs[i]] += 1.0;

    const auto& chords = song.sequence.chords;
    for (const auto& c : chords) chord_prior_[state(c)] += 1.0;
    for (std::size_t b = 2; b < chords.size(); ++b) {
      const auto& notes = song.score.bars[b].notes;
      if (notes.empty()) continue;
      const int first = pitch_class(notes.front().pitch).value();
      chord_table_[((state(chords[b - 2]) * kChords + state(chords[b - 1])) * kNotes + first) * kChords +
                   state(chords[b])] += 1.0;
    }
  }
  normalize_blocks(note_trigram_, kNotes, smoothing);
  normalize_blocks(chord_table_, kChords, smoothing);
  normalize_blocks(chord_prior_, kChords, smoothing);
}

double BayesianBand::corpus_note_probability(int prev2, int prev1, int next) const {
  return note_trigram_[(prev2 * kNotes + prev1) * kNotes + next];
}

double BayesianBand::session_note_probability(int prev2, int prev1, int next) const {
  return blend_note_probability(corpus_note_probability(prev2, prev1, next), novelty_,
                                static_cast<double>(pair_count(prev2, prev1)),
                                static_cast<double>(triple_count(prev2, prev1, next)));
}

double BayesianBand::chord_probability(std::size_t previous, std::size_t current, int note, std::size_t chord) const {
  return chord_table_[((previous * kChords + current) * kNotes + note) * kChords + chord];
}

int BayesianBand::predict_note(int prev2, int prev1) const {
  int best = 0;
  double best_p = -1.0;
  for (int o = 0; o < static_cast<int>(kNotes); ++o) {
    const double p = session_note_probability(prev2, prev1, o);
    if (p > best_p) {
      best_p = p;
      best = o;
    }
  }
  return best;
}

Chord BayesianBand::predict_chord(std::span<const int> notes, std::span<const Chord> chords) const {
  if (notes.size() < 2 || chords.size() < 2) {
    const auto best = std::max_element(chord_prior_.begin(), chord_prior_.end()) - chord_prior_.begin();
    return vocabulary_.at(static_cast<std::size_t>(best));
  }
  const int o = predict_note(notes[notes.size() - 2], notes[notes.size() - 1]);
  const auto previous = vocabulary_.index_of(chords[chords.size() - 2]);
  const auto current = vocabulary_.index_of(chords[chords.size() - 1]);
  if (!previous || !current) throw ValidationError("BayesianBand chord history outside the diatonic vocabulary");
  std::size_t best = 0;
  for (std::size_t c = 1; c < kChords; ++c) {
    if (chord_probability(*previous, *current, o, c) > chord_probability(*previous, *current, o, best)) best = c;
  }
  return vocabulary_.at(best);
}

void BayesianBand::observe(std::span<const int> notes) {
  // Pairs are counted as trigram antecedents, so triple/pair is a proper
  // conditional frequency.
  if (notes.size() < 3) return;
  const int prev2 = notes[notes.size() - 3];
  const int prev1 = notes[notes.size() - 2];
  const int next = notes[notes.size() - 1];
  ++pair_counts_[prev2 * kNotes + prev1];
  ++triple_counts_[(prev2 * kNotes + prev1) * kNotes + next];
}

void BayesianBand::reset_session() {
  std::fill(pair_counts_.begin(), pair_counts_.end(), 0);
  std::fill(triple_counts_.begin(), triple_counts_.end(), 0);
}

Chord bb_update_and_predict(BayesianBand& bb, std::span<const int> note_history, std::span<const Chord> chord_history,
                            std::optional<int> realized_note) {
  const Chord chord = bb.predict_chord(note_history, chord_history);
  if (realized_note) {
    std::vector<int> extended(note_history.begin(), note_history.end());
    extended.push_back(*realized_note);
    bb.observe(extended);
  }
  return chord;
}

}  // namespace chordjam

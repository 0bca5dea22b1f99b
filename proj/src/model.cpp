#include "chordjam/model.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace chordjam {

namespace {

std::size_t state_of(const ChordVocabulary& vocab, const Chord& chord) {
  const auto state = vocab.index_of(chord);
  if (!state) {
    throw ValidationError("chord " + chord.name() + " is not in the " + std::string(to_string(vocab.mode())) +
                          " vocabulary");
  }
  return *state;
}

void normalize_rows(Matrix& m, double epsilon) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (double& v : row) v += epsilon;
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    if (total > 0.0) {
      for (double& v : row) v /= total;
    } else {
      for (double& v : row) v = 1.0 / static_cast<double>(row.size());
    }
  }
}

void check_distribution(std::span<const double> values, double tolerance, const std::string& what) {
  double total = 0.0;
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw ModelError(what + " has an entry outside [0,1]");
    total += v;
  }
  if (std::abs(total - 1.0) > tolerance) {
    std::ostringstream msg;
    msg << what << " sums to " << total << ", not 1";
    throw ModelError(msg.str());
  }
}

Matrix matrix_from_json(const nlohmann::json& j, std::size_t rows, std::size_t cols, const std::string& what) {
  if (!j.is_array() || j.size() != rows) {
    throw ModelError(what + ": expected " + std::to_string(rows) + " rows, found " +
                     std::to_string(j.is_array() ? j.size() : 0));
  }
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    if (!row.is_array() || row.size() != cols) {
      throw ModelError(what + " row " + std::to_string(r) + ": expected " + std::to_string(cols) + " columns");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw ModelError(what + " row " + std::to_string(r) + " has a non-numeric entry");
      m(r, c) = row[c].get<double>();
    }
  }
  return m;
}

}  // namespace

void validate(const HmmModel& model, double tolerance) {
  const std::size_t n = model.size();
  if (model.pi.size() != n) throw ModelError("pi has " + std::to_string(model.pi.size()) + " entries, expected " + std::to_string(n));
  if (model.transitions.rows() != n || model.transitions.cols() != n) throw ModelError("transition matrix dimension mismatch");
  if (model.emissions.rows() != n || model.emissions.cols() != PitchClass::kCount) {
    throw ModelError("emission matrix dimension mismatch");
  }
  check_distribution(model.pi, tolerance, "pi");
  for (std::size_t i = 0; i < n; ++i) {
    check_distribution(model.transitions.row(i), tolerance, "transition row " + std::to_string(i));
    check_distribution(model.emissions.row(i), tolerance, "emission row " + std::to_string(i));
  }
}

Matrix learn_emissions(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab, double epsilon) {
  Matrix mu(vocab.size(), PitchClass::kCount);
  for (const auto& seq : corpus) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      const auto& h = seq.histograms[t];
      if (h.silent) continue;
      auto row = mu.row(state_of(vocab, seq.chords[t]));
      for (int pc = 0; pc < PitchClass::kCount; ++pc) row[pc] += h.mass[pc];
    }
  }
  normalize_rows(mu, epsilon);
  return mu;
}

Matrix learn_transitions(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab, double epsilon) {
  Matrix a(vocab.size(), vocab.size());
  for (const auto& seq : corpus) {
    if (seq.size() < 2) throw ValidationError("training sequence shorter than 2 bars");
    for (std::size_t t = 1; t < seq.size(); ++t) {
      a(state_of(vocab, seq.chords[t - 1]), state_of(vocab, seq.chords[t])) += 1.0;
    }
  }
  normalize_rows(a, epsilon);
  return a;
}

std::vector<double> learn_priors(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab,
                                 double epsilon) {
  if (corpus.empty()) throw ValidationError("cannot learn priors from an empty corpus");
  std::vector<double> counts(vocab.size(), 0.0);
  for (const auto& seq : corpus) {
    if (seq.chords.empty()) throw ValidationError("empty training sequence");
    counts[state_of(vocab, seq.chords.front())] += 1.0;
  }
  const double denom = static_cast<double>(corpus.size()) + static_cast<double>(vocab.size()) * epsilon;
  for (double& c : counts) c = (c + epsilon) / denom;
  return counts;
}

HmmModel train_model(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab, double epsilon) {
  if (corpus.empty()) throw ValidationError("cannot train on an empty corpus");
  if (epsilon < 0.0) throw ValidationError("smoothing epsilon must be non-negative");
  return HmmModel{vocab, epsilon, learn_priors(corpus, vocab, epsilon), learn_transitions(corpus, vocab, epsilon),
                  learn_emissions(corpus, vocab, epsilon)};
}

std::string model_to_json(const HmmModel& model) {
  nlohmann::ordered_json j;
  j["vocabulary_mode"] = std::string(to_string(model.vocabulary.mode()));
  j["epsilon"] = model.epsilon;
  j["pi"] = model.pi;
  auto rows = [](const Matrix& m) {
    auto out = nlohmann::ordered_json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
      const auto row = m.row(r);
      out.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return out;
  };
  j["A"] = rows(model.transitions);
  j["mu"] = rows(model.emissions);
  return j.dump() + "\n";
}

HmmModel model_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  }
  if (!j.is_object()) throw ModelError("model file is not a JSON object");
  for (const char* key : {"vocabulary_mode", "epsilon", "pi", "A", "mu"}) {
    if (!j.contains(key)) throw ModelError(std::string("model file is missing \"") + key + "\"");
  }
  HmmModel model;
  try {
    model.vocabulary = ChordVocabulary(parse_vocabulary_mode(j["vocabulary_mode"].get<std::string>()));
    model.epsilon = j["epsilon"].get<double>();
    model.pi = j["pi"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model file: ") + e.what());
  } catch (const ValidationError& e) {
    throw ModelError(e.what());
  }
  const std::size_t n = model.vocabulary.size();
  if (model.pi.size() != n) {
    throw ModelError("pi: expected " + std::to_string(n) + " entries, found " + std::to_string(model.pi.size()));
  }
  model.transitions = matrix_from_json(j["A"], n, n, "A");
  model.emissions = matrix_from_json(j["mu"], n, PitchClass::kCount, "mu");
  validate(model, 1e-6);
  return model;
}

void save_model(const HmmModel& model, const std::filesystem::path& destination) {
  std::ofstream out(destination, std::ios::binary);
  if (!out) throw ModelError("cannot write " + destination.string());
  out << model_to_json(model);
  if (!out) throw ModelError("failed writing " + destination.string());
}

HmmModel load_model(const std::filesystem::path& source) {
  std::ifstream in(source, std::ios::binary);
  if (!in) throw ModelError("cannot open model file " + source.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::string training_stats_json(std::span<const TrainingSequence> corpus, const HmmModel& model) {
  const auto& vocab = model.vocabulary;
  std::vector<std::size_t> freq(vocab.size(), 0);
  std::size_t bars = 0;
  for (const auto& seq : corpus) {
    for (const auto& chord : seq.chords) ++freq[state_of(vocab, chord)];
    bars += seq.size();
  }
  nlohmann::ordered_json j;
  j["songs"] = corpus.size();
  j["bars"] = bars;
  auto labels = nlohmann::ordered_json::array();
  auto table = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    labels.push_back(vocab.at(i).name());
    table.push_back({{"chord", vocab.at(i).name()}, {"count", freq[i]}});
  }
  j["chord_frequency"] = table;
  j["labels"] = labels;
  auto heat = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    const auto row = model.transitions.row(r);
    heat.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["transition_heatmap"] = heat;
  return j.dump(2) + "\n";
}

}  // namespace chordjam

#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "chordjam/ingest.hpp"
#include "chordjam/music.hpp"

namespace chordjam {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline constexpr double kDefaultSmoothing = 1e-6;

struct HmmModel {
  ChordVocabulary vocabulary;
  double epsilon = kDefaultSmoothing;
  std::vector<double> pi;  // N
  Matrix transitions;      // N x N, row i is P(next | current = i)
  Matrix emissions;        // N x 12, row c is the pitch-class profile of chord c

  std::size_t size() const { return vocabulary.size(); }
  friend bool operator==(const HmmModel&, const HmmModel&) = default;
};

/// Checks dimensions and that every distribution sums to 1 within
/// `tolerance`. Throws ModelError.
void validate(const HmmModel& model, double tolerance = 1e-6);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sequences whose chords fall outside `vocab` are rejected with ValidationError.
Matrix learn_emissions(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab,
                       double epsilon = kDefaultSmoothing);
Matrix learn_transitions(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab,
                         double epsilon = kDefaultSmoothing);
std::vector<double> learn_priors(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab,
                                 double epsilon = kDefaultSmoothing);

HmmModel train_model(std::span<const TrainingSequence> corpus, const ChordVocabulary& vocab,
                     double epsilon = kDefaultSmoothing);

std::string model_to_json(const HmmModel& model);
HmmModel model_from_json(std::string_view text);
void save_model(const HmmModel& model, const std::filesystem::path& destination);
HmmModel load_model(const std::filesystem::path& source);

/// Chord frequency table plus the transition matrix with row/column labels,
/// shaped for plotting as a heat map.
std::string training_stats_json(std::span<const TrainingSequence> corpus, const HmmModel& model);

}  // namespace chordjam

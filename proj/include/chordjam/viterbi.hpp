#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "chordjam/model.hpp"
#include "chordjam/music.hpp"

namespace chordjam {

using ObservationHistory = std::vector<PitchHistogram>;

struct ViterbiResult {
  std::vector<Chord> path;
  std::vector<std::size_t> states;  // vocabulary indices of `path`
  double log_score = 0.0;
  /// parents[t][k]: best predecessor of state k at step t (row 0 is unused).
  std::vector<std::vector<std::uint16_t>> parents;
};

/// h . log(mu_c); silent bars carry no evidence and score 0 for every chord.
double emission_logprob(const PitchHistogram& h, const HmmModel& model, std::size_t chord_index);

/// Log-space tables precomputed once per model so repeated decodes (one per
/// bar in a live session) skip the logarithms.
class Decoder {
 public:
  explicit Decoder(const HmmModel& model);

  const HmmModel& model() const { return model_; }
  std::size_t size() const { return model_.size(); }

  double emission(const PitchHistogram& h, std::size_t state) const;
  double log_prior(std::size_t state) const { return log_pi_[state]; }
  double log_transition(std::size_t from, std::size_t to) const { return log_a_[from * size() + to]; }

  /// Maximizes (1-alpha) log P(O|C) + alpha log P(C). Ties go to the lowest
  /// state index at every max.
  ViterbiResult decode(std::span<const PitchHistogram> history, double alpha) const;

 private:
  const HmmModel& model_;
  std::vector<double> log_pi_;
  std::vector<double> log_a_;
  std::vector<double> log_mu_;
};

ViterbiResult viterbi(std::span<const PitchHistogram> history, const HmmModel& model, double alpha = 0.5);

/// The alpha-weighted objective of one explicit state path.
double path_log_score(std::span<const PitchHistogram> history, const HmmModel& model,
                      std::span<const std::size_t> states, double alpha);

inline constexpr std::uint64_t kBruteForceLimit = 10'000'000;

/// Exhaustive search over all N^T paths, returning the best one (ties go to the
/// lexicographically smallest state sequence). Refuses instances with
/// N^T > kBruteForceLimit.
std::vector<std::size_t> brute_force_map(std::span<const PitchHistogram> history, const HmmModel& model,
                                         double alpha);

void validate_alpha(double alpha);

}  // namespace chordjam

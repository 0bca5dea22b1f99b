#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "chordjam/model.hpp"

namespace chordjam::testing {

inline std::vector<double> random_distribution(std::mt19937_64& rng, std::size_t size) {
  std::gamma_distribution<double> g(1.0, 1.0);
  std::vector<double> v(size);
  double total = 0.0;
  for (auto& x : v) {
    x = g(rng) + 1e-3;
    total += x;
  }
  for (auto& x : v) x /= total;
  return v;
}

inline HmmModel random_model(std::mt19937_64& rng) {
  HmmModel m;
  m.vocabulary = ChordVocabulary(VocabularyMode::DiatonicC7);
  const std::size_t n = m.size();
  m.pi = random_distribution(rng, n);
  m.transitions = Matrix(n, n);
  m.emissions = Matrix(n, 12);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = random_distribution(rng, n);
    std::copy(a.begin(), a.end(), m.transitions.row(i).begin());
    const auto mu = random_distribution(rng, 12);
    std::copy(mu.begin(), mu.end(), m.emissions.row(i).begin());
  }
  return m;
}

inline std::vector<PitchHistogram> random_history(std::mt19937_64& rng, std::size_t steps) {
  std::vector<PitchHistogram> out;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto w = random_distribution(rng, 12);
    std::array<double, 12> arr{};
    std::copy(w.begin(), w.end(), arr.begin());
    out.push_back(PitchHistogram::from_weights(arr));
  }
  return out;
}

// Test-side oracle: scores every path over states [0, n) directly from the
// probabilities. emission_scale multiplies the emission log-terms.
struct OracleResult {
  std::vector<std::size_t> path;
  double score = -std::numeric_limits<double>::infinity();
  double runner_up = -std::numeric_limits<double>::infinity();  // best score of any other path
};

inline double oracle_score(const HmmModel& m, const std::vector<PitchHistogram>& h, std::span<const std::size_t> path,
                           double alpha, double emission_scale = 1.0) {
  double obs = 0.0, structure = std::log(m.pi[path[0]]);
  for (std::size_t s = 0; s < h.size(); ++s) {
    for (int pc = 0; pc < 12; ++pc) {
      if (h[s].mass[pc] > 0) obs += h[s].mass[pc] * std::log(m.emissions(path[s], pc));
    }
    if (s > 0) structure += std::log(m.transitions(path[s - 1], path[s]));
  }
  return (1 - alpha) * emission_scale * obs + (alpha == 0.0 ? 0.0 : alpha * structure);
}

inline OracleResult oracle(const HmmModel& m, std::size_t n, const std::vector<PitchHistogram>& h, double alpha,
                           double emission_scale = 1.0) {
  OracleResult best;
  std::vector<std::size_t> path(h.size());
  std::function<void(std::size_t)> walk = [&](std::size_t t) {
    if (t == h.size()) {
      const double score = oracle_score(m, h, path, alpha, emission_scale);
      if (score > best.score) {
        best.runner_up = best.score;
        best.score = score;
        best.path = path;
      } else {
        best.runner_up = std::max(best.runner_up, score);
      }
      return;
    }
    for (std::size_t k = 0; k < n; ++k) {
      path[t] = k;
      walk(t + 1);
    }
  };
  walk(0);
  return best;
}

// Restricts a 7-state model to its first n states by making the rest
// unreachable: zero prior and zero incoming transition mass.
inline HmmModel restrict_states(HmmModel m, std::size_t n) {
  const std::size_t size = m.size();
  double pi_total = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    if (k >= n) m.pi[k] = 0.0;
    pi_total += m.pi[k];
  }
  for (auto& p : m.pi) p /= pi_total;
  for (std::size_t i = 0; i < size; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < size; ++j) {
      if (j >= n) m.transitions(i, j) = 0.0;
      total += m.transitions(i, j);
    }
    for (std::size_t j = 0; j < size; ++j) m.transitions(i, j) /= total;
  }
  return m;
}

}  // namespace chordjam::testing

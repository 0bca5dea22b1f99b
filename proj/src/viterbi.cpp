#include "chordjam/viterbi.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace chordjam {

namespace {

double safe_log(double p) { return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity(); }

double dot_log(const PitchHistogram& h, std::span<const double> log_row) {
  if (h.silent) return 0.0;
  double score = 0.0;
  for (int pc = 0; pc < PitchClass::kCount; ++pc) {
    if (h.mass[pc] > 0.0) score += h.mass[pc] * log_row[pc];
  }
  return score;
}

}  // namespace

void validate_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ValidationError("alpha must lie in [0,1], got " + std::to_string(alpha));
}

double emission_logprob(const PitchHistogram& h, const HmmModel& model, std::size_t chord_index) {
  if (h.silent) return 0.0;
  const auto row = model.emissions.row(chord_index);
  double score = 0.0;
  for (int pc = 0; pc < PitchClass::kCount; ++pc) {
    if (h.mass[pc] > 0.0) score += h.mass[pc] * safe_log(row[pc]);
  }
  return score;
}

Decoder::Decoder(const HmmModel& model) : model_(model) {
  const std::size_t n = model.size();
  log_pi_.resize(n);
  log_a_.resize(n * n);
  log_mu_.resize(n * PitchClass::kCount);
  for (std::size_t i = 0; i < n; ++i) {
    log_pi_[i] = safe_log(model.pi[i]);
    for (std::size_t j = 0; j < n; ++j) log_a_[i * n + j] = safe_log(model.transitions(i, j));
    for (int pc = 0; pc < PitchClass::kCount; ++pc) log_mu_[i * PitchClass::kCount + pc] = safe_log(model.emissions(i, pc));
  }
}

double Decoder::emission(const PitchHistogram& h, std::size_t state) const {
  return dot_log(h, std::span<const double>(log_mu_).subspan(state * PitchClass::kCount, PitchClass::kCount));
}

ViterbiResult Decoder::decode(std::span<const PitchHistogram> history, double alpha) const {
  validate_alpha(alpha);
  if (history.empty()) throw ValidationError("cannot decode an empty observation history");
  const std::size_t n = size();
  const std::size_t steps = history.size();
  const double w_obs = 1.0 - alpha;
  const double w_struct = alpha;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  // 0 * -inf must stay 0 when a weight is switched off.
  auto weighted = [](double w, double v) { return w == 0.0 ? 0.0 : w * v; };

  ViterbiResult result;
  result.parents.assign(steps, std::vector<std::uint16_t>(n, 0));
  std::vector<double> prev(n), cur(n);
  for (std::size_t k = 0; k < n; ++k) {
    prev[k] = weighted(w_obs, emission(history[0], k)) + weighted(w_struct, log_pi_[k]);
  }
  for (std::size_t t = 1; t < steps; ++t) {
    auto& parents = result.parents[t];
    for (std::size_t k = 0; k < n; ++k) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const double v = weighted(w_struct, log_a_[i * n + k]) + prev[i];
        if (v > best) {
          best = v;
          arg = i;
        }
      }
      cur[k] = weighted(w_obs, emission(history[t], k)) + best;
      parents[k] = static_cast<std::uint16_t>(arg);
    }
    std::swap(prev, cur);
  }

  std::size_t last = 0;
  double best = kNegInf;
  for (std::size_t k = 0; k < n; ++k) {
    if (prev[k] > best) {
      best = prev[k];
      last = k;
    }
  }
  result.log_score = best;
  result.states.assign(steps, 0);
  result.states[steps - 1] = last;
  for (std::size_t t = steps - 1; t > 0; --t) result.states[t - 1] = result.parents[t][result.states[t]];
  result.path.reserve(steps);
  for (std::size_t s : result.states) result.path.push_back(model_.vocabulary.at(s));
  return result;
}

ViterbiResult viterbi(std::span<const PitchHistogram> history, const HmmModel& model, double alpha) {
  return Decoder(model).decode(history, alpha);
}

double path_log_score(std::span<const PitchHistogram> history, const HmmModel& model,
                      std::span<const std::size_t> states, double alpha) {
  validate_alpha(alpha);
  if (states.size() != history.size()) throw ValidationError("path length differs from history length");
  double obs = 0.0;
  double structure = 0.0;
  for (std::size_t t = 0; t < states.size(); ++t) {
    obs += emission_logprob(history[t], model, states[t]);
    structure += t == 0 ? safe_log(model.pi[states[0]]) : safe_log(model.transitions(states[t - 1], states[t]));
  }
  return (alpha == 1.0 ? 0.0 : (1.0 - alpha) * obs) + (alpha == 0.0 ? 0.0 : alpha * structure);
}

std::vector<std::size_t> brute_force_map(std::span<const PitchHistogram> history, const HmmModel& model,
                                         double alpha) {
  validate_alpha(alpha);
  if (history.empty()) throw ValidationError("cannot decode an empty observation history");
  const std::size_t n = model.size();
  std::uint64_t paths = 1;
  for (std::size_t t = 0; t < history.size(); ++t) {
    paths *= n;
    if (paths > kBruteForceLimit) {
      throw ValidationError("brute-force search refused: N^T exceeds " + std::to_string(kBruteForceLimit));
    }
  }
  std::vector<std::size_t> states(history.size(), 0);
  std::vector<std::size_t> best_states = states;
  double best = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (std::uint64_t p = 0; p < paths; ++p) {
    // Odometer increment, last position fastest: lexicographic order.
    if (p > 0) {
      for (std::size_t t = states.size(); t-- > 0;) {
        if (++states[t] < n) break;
        states[t] = 0;
      }
    }
    const double score = path_log_score(history, model, states, alpha);
    if (first || score > best) {
      best = score;
      best_states = states;
      first = false;
    }
  }
  return best_states;
}

}  // namespace chordjam

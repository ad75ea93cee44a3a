#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "misc/error.hpp"
#include "misc/numerics/random.hpp"

namespace misc::decoder {

struct GenerationConfig {
  double top_p = 0.3;
  std::size_t top_k = 30;
  double temperature = 0.7;
  double repetition_penalty = 1.03;
  std::size_t max_length = 40;
  bool greedy = false;  // argmax decoding; the sampling fields are ignored

  void validate() const {
    if (!(top_p > 0.0 && top_p <= 1.0)) throw ContractError("top_p must lie in (0, 1]");
    if (top_k < 1) throw ContractError("top_k must be >= 1");
    if (!(temperature > 0.0)) throw ContractError("temperature must be positive");
    if (!(repetition_penalty >= 1.0)) throw ContractError("repetition penalty must be >= 1");
  }
};

struct Candidate {
  int id;
  double logit;
  double prob = 0.0;
};

/// Sign-aware repetition penalty: logits of tokens already generated are
/// divided by `penalty` when positive and multiplied when negative.
inline void apply_repetition_penalty(std::vector<double>& logits, std::span<const int> history, double penalty) {
  if (penalty == 1.0) return;
  std::unordered_set<int> seen(history.begin(), history.end());
  for (int id : seen) {
    if (id < 0 || static_cast<std::size_t>(id) >= logits.size()) continue;
    double& l = logits[static_cast<std::size_t>(id)];
    l = l > 0.0 ? l / penalty : l * penalty;
  }
}

/// Candidates surviving penalty → temperature → top-k → top-p, with their
/// renormalized probabilities, in descending probability order. Never empty.
template <typename T>
std::vector<Candidate> filter_candidates(std::span<const T> logits, const GenerationConfig& config,
                                         std::span<const int> history) {
  config.validate();
  if (logits.empty()) throw ContractError("sampling from an empty distribution");
  std::vector<double> adjusted(logits.begin(), logits.end());
  apply_repetition_penalty(adjusted, history, config.repetition_penalty);
  for (auto& l : adjusted) l /= config.temperature;

  std::vector<Candidate> cands;
  cands.reserve(adjusted.size());
  for (std::size_t i = 0; i < adjusted.size(); ++i) cands.push_back({static_cast<int>(i), adjusted[i]});
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.logit > b.logit; });
  cands.resize(std::min(cands.size(), config.top_k));

  const double peak = cands.front().logit;
  double total = 0.0;
  for (auto& c : cands) total += c.prob = std::exp(c.logit - peak);
  for (auto& c : cands) c.prob /= total;

  std::size_t keep = 0;
  double mass = 0.0;
  while (keep < cands.size()) {
    mass += cands[keep].prob;
    ++keep;
    if (mass >= config.top_p) break;
  }
  cands.resize(keep);

  total = 0.0;
  for (const auto& c : cands) total += c.prob;
  for (auto& c : cands) c.prob /= total;
  return cands;
}

template <typename T>
int sample_token(std::span<const T> logits, const GenerationConfig& config, std::span<const int> history,
                 numerics::Rng& rng) {
  if (config.greedy) {
    return static_cast<int>(std::max_element(logits.begin(), logits.end()) - logits.begin());
  }
  const auto cands = filter_candidates(logits, config, history);
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& c : cands) {
    acc += c.prob;
    if (u < acc) return c.id;
  }
  return cands.back().id;
}

}  // namespace misc::decoder

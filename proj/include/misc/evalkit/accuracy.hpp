#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "misc/error.hpp"
#include "misc/strategy/strategy.hpp"

namespace misc::evalkit {

struct StrategyAccuracy {
  double acc = 0.0;                                        // top-1
  std::array<double, strategy::kNumStrategies> top_k{};   // top_k[k-1] = accuracy@k
};

/// Top-1 and accuracy@k for k = 1..8 from per-example strategy logits.
inline StrategyAccuracy strategy_accuracy(const std::vector<std::vector<double>>& logits, const std::vector<int>& golds) {
  if (logits.empty()) throw ContractError("strategy accuracy of an empty set");
  if (logits.size() != golds.size()) throw DimensionError("strategy accuracy: logits and golds differ in length");
  std::array<std::size_t, strategy::kNumStrategies> hits{};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (golds[i] < 0 || golds[i] >= static_cast<int>(strategy::kNumStrategies)) throw IndexError("gold strategy out of range");
    const auto ranked = strategy::top_k_strategies(std::span<const double>(logits[i]), strategy::kNumStrategies);
    for (std::size_t rank = 0; rank < ranked.size(); ++rank) {
      if (static_cast<int>(ranked[rank]) == golds[i]) {
        for (std::size_t k = rank; k < hits.size(); ++k) ++hits[k];
        break;
      }
    }
  }
  StrategyAccuracy out;
  for (std::size_t k = 0; k < hits.size(); ++k) out.top_k[k] = static_cast<double>(hits[k]) / static_cast<double>(logits.size());
  out.acc = out.top_k[0];
  return out;
}

}  // namespace misc::evalkit

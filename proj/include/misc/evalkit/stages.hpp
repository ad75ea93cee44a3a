#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "misc/corpus/types.hpp"
#include "misc/error.hpp"
#include "misc/strategy/strategy_id.hpp"
#include "misc/format.hpp"

namespace misc::evalkit {

/// A strategy occurrence at a relative position in its conversation.
struct StageRecord {
  double progress = 0.0;  // turn index / dialogue length, in [0, 1)
  strategy::StrategyId strategy = strategy::StrategyId::Question;
};

using StrategyCounts = std::array<std::size_t, strategy::kNumStrategies>;

struct StageHistogram {
  std::size_t bins = 5;
  std::vector<StrategyCounts> counts;  // [bin][strategy]

  std::size_t bin_total(std::size_t bin) const {
    std::size_t n = 0;
    for (auto c : counts.at(bin)) n += c;
    return n;
  }
  /// Share of each strategy within a bin; all zero for an empty bin.
  std::array<double, strategy::kNumStrategies> proportions(std::size_t bin) const {
    std::array<double, strategy::kNumStrategies> out{};
    const std::size_t total = bin_total(bin);
    if (total == 0) return out;
    for (std::size_t s = 0; s < out.size(); ++s) out[s] = static_cast<double>(counts[bin][s]) / static_cast<double>(total);
    return out;
  }
};

inline std::size_t stage_bin(double progress, std::size_t bins) {
  if (!(progress >= 0.0)) throw ContractError("conversation progress must be non-negative");
  const auto b = static_cast<std::size_t>(std::floor(progress * static_cast<double>(bins)));
  return std::min(b, bins - 1);
}

inline StageHistogram stage_distribution(const std::vector<StageRecord>& records, std::size_t bins = 5) {
  if (bins == 0) throw ContractError("stage histogram needs at least one bin");
  StageHistogram h;
  h.bins = bins;
  h.counts.assign(bins, StrategyCounts{});
  for (const auto& r : records) ++h.counts[stage_bin(r.progress, bins)][strategy::code(r.strategy)];
  return h;
}

/// Every labelled supporter turn of each dialogue.
inline std::vector<StageRecord> stage_records(const std::vector<corpus::Dialogue>& dialogues) {
  std::vector<StageRecord> out;
  for (const auto& d : dialogues) {
    const double len = static_cast<double>(d.utterances.size());
    for (std::size_t i = 0; i < d.utterances.size(); ++i) {
      const auto& u = d.utterances[i];
      if (u.speaker == corpus::Speaker::Supporter && u.strategy) out.push_back({static_cast<double>(i) / len, *u.strategy});
    }
  }
  return out;
}

/// Gold strategies of examples at their response positions.
inline std::vector<StageRecord> stage_records(const std::vector<corpus::Example>& examples) {
  std::vector<StageRecord> out;
  for (const auto& ex : examples) out.push_back({ex.progress(), ex.strategy_label});
  return out;
}

inline std::string stage_histogram_csv(const StageHistogram& h) {
  std::string out = "bin,start,end,strategy,count,proportion\n";
  for (std::size_t b = 0; b < h.bins; ++b) {
    const auto props = h.proportions(b);
    const double start = static_cast<double>(b) / static_cast<double>(h.bins);
    const double end = static_cast<double>(b + 1) / static_cast<double>(h.bins);
    for (std::size_t s = 0; s < strategy::kNumStrategies; ++s) {
      out += std::to_string(b) + ',' + format_real(start) + ',' + format_real(end) + ',' +
             std::string(strategy::name(static_cast<strategy::StrategyId>(s))) + ',' + std::to_string(h.counts[b][s]) + ',' +
             format_real(props[s]) + '\n';
    }
  }
  return out;
}

}  // namespace misc::evalkit

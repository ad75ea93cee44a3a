#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "misc/corpus/types.hpp"
#include "misc/error.hpp"
#include "misc/numerics/random.hpp"

namespace misc::corpus {

enum class Chunking {
  NonOverlapping,  // consecutive blocks of `window` utterances; contexts stay inside a block
  Sliding,         // every response sees up to window−1 preceding utterances
};

enum class SplitLevel { Example, Dialogue };

struct PreprocessConfig {
  std::size_t window = 10;
  std::uint64_t seed = 0;
  Chunking chunking = Chunking::NonOverlapping;
  SplitLevel split_level = SplitLevel::Example;
};

struct PreprocessReport {
  std::size_t dialogues = 0;
  std::size_t skipped_no_supporter = 0;  // dialogues contributing nothing
  std::size_t skipped_no_seeker_context = 0;  // supporter turns whose context has no seeker post
  std::size_t examples = 0;
};

struct Splits {
  std::vector<Example> train;
  std::vector<Example> dev;
  std::vector<Example> test;
  PreprocessReport report;
};

/// Examples of one dialogue: one per supporter turn whose truncated context
/// contains a seeker post. Appends skip counts to `report`.
inline std::vector<Example> dialogue_examples(const Dialogue& d, std::size_t dialogue_index,
                                              const PreprocessConfig& config, PreprocessReport& report) {
  if (config.window < 2) throw ContractError("preprocess window must be >= 2");
  std::vector<Example> out;
  const auto& turns = d.utterances;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (turns[i].speaker != Speaker::Supporter) continue;
    std::size_t begin = 0;
    if (config.chunking == Chunking::NonOverlapping) {
      begin = (i / config.window) * config.window;
    } else {
      begin = i >= config.window - 1 ? i - (config.window - 1) : 0;
    }
    Example ex;
    ex.context.assign(turns.begin() + static_cast<std::ptrdiff_t>(begin), turns.begin() + static_cast<std::ptrdiff_t>(i));
    const Utterance* post = nullptr;
    for (const auto& u : ex.context)
      if (u.speaker == Speaker::Seeker) post = &u;
    if (post == nullptr) {
      ++report.skipped_no_seeker_context;
      continue;
    }
    ex.id = "d" + std::to_string(dialogue_index) + "_t" + std::to_string(i);
    ex.dialogue_index = dialogue_index;
    ex.turn_index = i;
    ex.dialogue_length = turns.size();
    ex.situation = d.situation;
    ex.last_post = post->text;
    ex.response = turns[i].text;
    ex.strategy_label = turns[i].strategy.value_or(StrategyId::Others);
    out.push_back(std::move(ex));
  }
  return out;
}

/// Sizes for an 8:1:1 split of n items; dev and test are round(n/10).
inline std::array<std::size_t, 3> split_sizes(std::size_t n) {
  const auto tenth = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 10.0));
  const std::size_t held = std::min(n / 2, tenth);
  return {n - 2 * held, held, held};
}

namespace detail {

template <typename Item>
void split_three(std::vector<Item> items, std::vector<Item>& a, std::vector<Item>& b, std::vector<Item>& c) {
  const auto sizes = split_sizes(items.size());
  auto it = items.begin();
  a.assign(it, it + static_cast<std::ptrdiff_t>(sizes[0]));
  it += static_cast<std::ptrdiff_t>(sizes[0]);
  b.assign(it, it + static_cast<std::ptrdiff_t>(sizes[1]));
  it += static_cast<std::ptrdiff_t>(sizes[1]);
  c.assign(it, items.end());
}

}  // namespace detail

/// Truncate, build examples, shuffle under `seed`, split 8:1:1.
/// A pure function of its arguments.
inline Splits preprocess(const std::vector<Dialogue>& dialogues, const PreprocessConfig& config) {
  if (config.window < 2) throw ContractError("preprocess window must be >= 2");
  Splits splits;
  splits.report.dialogues = dialogues.size();
  std::vector<std::vector<Example>> per_dialogue;
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    const auto& d = dialogues[i];
    bool has_supporter = false;
    for (const auto& u : d.utterances) has_supporter = has_supporter || u.speaker == Speaker::Supporter;
    if (!has_supporter) {
      ++splits.report.skipped_no_supporter;
      continue;
    }
    per_dialogue.push_back(dialogue_examples(d, i, config, splits.report));
  }
  numerics::Rng rng(config.seed);
  if (config.split_level == SplitLevel::Example) {
    std::vector<Example> all;
    for (auto& group : per_dialogue)
      for (auto& ex : group) all.push_back(std::move(ex));
    rng.shuffle(all);
    detail::split_three(std::move(all), splits.train, splits.dev, splits.test);
  } else {
    rng.shuffle(per_dialogue);
    std::vector<std::vector<Example>> a, b, c;
    detail::split_three(std::move(per_dialogue), a, b, c);
    auto flatten = [](std::vector<std::vector<Example>>& groups, std::vector<Example>& out) {
      for (auto& g : groups)
        for (auto& ex : g) out.push_back(std::move(ex));
    };
    flatten(a, splits.train);
    flatten(b, splits.dev);
    flatten(c, splits.test);
  }
  splits.report.examples = splits.train.size() + splits.dev.size() + splits.test.size();
  return splits;
}

}  // namespace misc::corpus

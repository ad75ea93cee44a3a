#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misc/commonsense/blocks.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "misc/error.hpp"
#include "misc/model.hpp"

namespace misc::evalkit {

struct BlockAttention {
  std::string relation;
  std::string text;
  std::vector<double> weights;  // refinement attention over the context keys

  friend bool operator==(const BlockAttention&, const BlockAttention&) = default;
};

/// Refinement attention of one example's blocks, split by source, and its
/// strategy distribution p^g.
struct AttentionDump {
  std::string example_id;
  std::vector<std::string> context_tokens;  // the attention keys, in order
  std::vector<BlockAttention> situation;
  std::vector<BlockAttention> post;
  std::vector<double> strategy_distribution;

  friend bool operator==(const AttentionDump&, const AttentionDump&) = default;
};

template <typename T>
AttentionDump attention_dump(const MiscModel<T>& model, const ModelInput& input, const corpus::Vocabulary& vocab) {
  Tape<T> tape(false);
  tape.set_training(false);
  const auto encoded = model.encode(tape, input, FactorFlags{});
  AttentionDump dump;
  dump.example_id = input.id;
  const auto& ids = encoded.context.layout.ids;
  const std::size_t first_key = model.config().refine_include_cls ? 0 : 1;
  for (std::size_t i = first_key; i < ids.size(); ++i) dump.context_tokens.push_back(vocab.token(ids[i]));
  auto fill = [](const std::vector<commonsense::MentalBlock>& blocks, const encoder::RefinedBlocks<T>& refined,
                 std::vector<BlockAttention>& out) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      auto row = refined.weights.row(b);
      out.push_back({std::string(commonsense::name(blocks[b].relation)), blocks[b].tail,
                     std::vector<double>(row.begin(), row.end())});
    }
  };
  fill(input.situation_blocks, *encoded.situation, dump.situation);
  fill(input.post_blocks, *encoded.post, dump.post);
  const auto& p = encoded.prediction->distribution.value();
  dump.strategy_distribution.assign(p.data().begin(), p.data().end());
  return dump;
}

inline nlohmann::json to_json(const AttentionDump& d) {
  auto blocks = [](const std::vector<BlockAttention>& bs, const char* source) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : bs) arr.push_back({{"source", source}, {"relation", b.relation}, {"text", b.text}, {"weights", b.weights}});
    return arr;
  };
  return {{"example_id", d.example_id},
          {"context_tokens", d.context_tokens},
          {"situation", blocks(d.situation, "situation")},
          {"post", blocks(d.post, "last_post")},
          {"strategy_distribution", d.strategy_distribution}};
}

inline AttentionDump parse_attention_dump(const nlohmann::json& j) {
  try {
    AttentionDump d;
    d.example_id = j.at("example_id").get<std::string>();
    d.context_tokens = j.at("context_tokens").get<std::vector<std::string>>();
    auto blocks = [](const nlohmann::json& arr) {
      std::vector<BlockAttention> out;
      for (const auto& b : arr)
        out.push_back({b.at("relation").get<std::string>(), b.at("text").get<std::string>(),
                       b.at("weights").get<std::vector<double>>()});
      return out;
    };
    d.situation = blocks(j.at("situation"));
    d.post = blocks(j.at("post"));
    d.strategy_distribution = j.at("strategy_distribution").get<std::vector<double>>();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(0, std::string("attention dump: ") + e.what());
  }
}

}  // namespace misc::evalkit

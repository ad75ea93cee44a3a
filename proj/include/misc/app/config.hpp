#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "misc/commonsense/blocks.hpp"
#include "misc/corpus/io.hpp"
#include "misc/error.hpp"
#include "misc/model.hpp"
#include "misc/training/config.hpp"

namespace misc::app {

/// Where mental-state blocks come from: a cache file, or the synthetic
/// provider seeded with `seed`.
struct BlockSettings {
  std::optional<std::string> cache;
  std::uint64_t seed = 0;
  std::size_t tails_per_relation = 3;
};

inline nlohmann::json to_json(const BlockSettings& b) {
  return {{"cache", b.cache ? nlohmann::json(*b.cache) : nlohmann::json(nullptr)},
          {"block_seed", b.seed},
          {"tails_per_relation", b.tails_per_relation}};
}

inline BlockSettings block_settings_from_json(const nlohmann::json& j, BlockSettings b = {}) {
  if (j.contains("cache") && !j.at("cache").is_null()) b.cache = j.at("cache").get<std::string>();
  b.seed = j.value("block_seed", b.seed);
  b.tails_per_relation = j.value("tails_per_relation", b.tails_per_relation);
  return b;
}

inline std::unique_ptr<commonsense::BlockProvider> make_provider(const BlockSettings& b, const corpus::Vocabulary& vocab) {
  if (b.cache) return std::make_unique<commonsense::BlockCache>(commonsense::load_cache(*b.cache));
  return std::make_unique<commonsense::SyntheticProvider>(b.seed, vocab, b.tails_per_relation);
}

/// Everything `train` reads from its flat JSON config file.
struct RunConfig {
  ModelConfig model;
  training::TrainConfig train;
  BlockSettings blocks;
};

inline const std::set<std::string>& known_config_keys() {
  static const std::set<std::string> keys = {
      "layers", "heads", "model_dim", "ffn_dim", "max_positions", "dropout", "vocab_size", "refine_include_cls",
      "separate_factor_projections", "strategy_mode", "seed", "lr", "warmup_steps", "beta1", "beta2", "eps",
      "weight_decay", "epochs", "train_batch", "eval_batch", "use_g", "use_s", "use_x", "gold_strategy_mixing",
      "max_steps", "clip_norm", "constant_lr", "restore_best", "cache", "block_seed", "tails_per_relation"};
  return keys;
}

/// Parses a flat config object; unknown keys are rejected so typos surface.
inline RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError(0, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known_config_keys().count(key)) throw SchemaError(0, "unknown config key \"" + key + "\"");
  }
  try {
    RunConfig rc;
    rc.model = model_config_from_json(j);
    rc.train = training::train_config_from_json(j);
    rc.blocks = block_settings_from_json(j);
    return rc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(0, std::string("config: ") + e.what());
  }
}

inline RunConfig load_run_config(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(corpus::read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(0, path + ": " + e.what());
  }
  return run_config_from_json(j);
}

inline nlohmann::json to_json(const RunConfig& rc) {
  nlohmann::json j = to_json(rc.model);
  for (const auto& [k, v] : training::to_json(rc.train).items()) j[k] = v;
  for (const auto& [k, v] : to_json(rc.blocks).items()) j[k] = v;
  return j;
}

}  // namespace misc::app

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misc/commonsense/blocks.hpp"
#include "misc/corpus/types.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "misc/decoder/decoder.hpp"
#include "misc/encoder/encoder.hpp"
#include "misc/numerics/checkpoint.hpp"
#include "misc/numerics/layers.hpp"
#include "misc/strategy/strategy.hpp"

namespace misc {

using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

enum class StrategyMode {
  Mixture,  // h^g = p^g · T
  Single,   // h^g = one_hot(argmax p^g) · T
};

struct ModelConfig {
  encoder::EncoderConfig arch;
  std::size_t vocab_size = 0;
  bool refine_include_cls = true;
  bool separate_factor_projections = true;
  StrategyMode strategy_mode = StrategyMode::Mixture;
  std::uint64_t seed = 0;
};

inline nlohmann::json to_json(const ModelConfig& c) {
  return {{"layers", c.arch.layers},
          {"heads", c.arch.heads},
          {"model_dim", c.arch.model_dim},
          {"ffn_dim", c.arch.ffn_dim},
          {"max_positions", c.arch.max_positions},
          {"dropout", c.arch.dropout},
          {"vocab_size", c.vocab_size},
          {"refine_include_cls", c.refine_include_cls},
          {"separate_factor_projections", c.separate_factor_projections},
          {"strategy_mode", c.strategy_mode == StrategyMode::Single ? "single" : "mixture"},
          {"seed", c.seed}};
}

/// Reads whichever fields are present, keeping defaults for the rest.
inline ModelConfig model_config_from_json(const nlohmann::json& j, ModelConfig c = {}) {
  c.arch.layers = j.value("layers", c.arch.layers);
  c.arch.heads = j.value("heads", c.arch.heads);
  c.arch.model_dim = j.value("model_dim", c.arch.model_dim);
  c.arch.ffn_dim = j.value("ffn_dim", c.arch.ffn_dim);
  c.arch.max_positions = j.value("max_positions", c.arch.max_positions);
  c.arch.dropout = j.value("dropout", c.arch.dropout);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.refine_include_cls = j.value("refine_include_cls", c.refine_include_cls);
  c.separate_factor_projections = j.value("separate_factor_projections", c.separate_factor_projections);
  const std::string mode = j.value("strategy_mode", std::string(c.strategy_mode == StrategyMode::Single ? "single" : "mixture"));
  if (mode != "single" && mode != "mixture") throw ContractError("strategy_mode must be \"mixture\" or \"single\"");
  c.strategy_mode = mode == "single" ? StrategyMode::Single : StrategyMode::Mixture;
  c.seed = j.value("seed", c.seed);
  return c;
}

/// Runtime ablation switches (use_g/use_s/use_x) and the source of the
/// strategy distribution fed to the codebook.
struct FactorFlags {
  bool use_g = true;
  bool use_s = true;
  bool use_x = true;
  bool gold_strategy_mixing = false;  // teacher-force h^g from the gold label
};

/// An example tokenized and paired with its commonsense blocks.
struct ModelInput {
  std::string id;
  std::vector<std::vector<int>> context;
  std::vector<commonsense::MentalBlock> situation_blocks;
  std::vector<commonsense::MentalBlock> post_blocks;
  std::vector<std::vector<int>> situation_ids;
  std::vector<std::vector<int>> post_ids;
  std::vector<int> response;
  int strategy = 0;
};

inline ModelInput prepare_input(const corpus::Example& ex, const corpus::Vocabulary& vocab,
                                const commonsense::BlockProvider& provider) {
  ModelInput in;
  in.id = ex.id;
  for (const auto& u : ex.context) in.context.push_back(vocab.encode(u.text));
  in.situation_blocks = commonsense::query_blocks(provider, ex.situation, commonsense::BlockSource::Situation);
  in.post_blocks = commonsense::query_blocks(provider, ex.last_post, commonsense::BlockSource::LastPost);
  for (const auto& b : in.situation_blocks) in.situation_ids.push_back(vocab.encode(b.tail));
  for (const auto& b : in.post_blocks) in.post_ids.push_back(vocab.encode(b.tail));
  in.response = vocab.encode(ex.response);
  in.strategy = strategy::code(ex.strategy_label);
  return in;
}

inline std::vector<ModelInput> prepare_inputs(const std::vector<corpus::Example>& examples,
                                              const corpus::Vocabulary& vocab,
                                              const commonsense::BlockProvider& provider) {
  std::vector<ModelInput> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) out.push_back(prepare_input(ex, vocab, provider));
  return out;
}

template <typename T>
struct EncodedFactors {
  encoder::ContextEncoding<T> context;
  std::optional<encoder::RefinedBlocks<T>> situation;
  std::optional<encoder::RefinedBlocks<T>> post;
  std::optional<strategy::StrategyPrediction<T>> prediction;
  std::optional<Var<T>> strategy_vector;
  decoder::FactorSet<T> factors;
};

/// Encoder, commonsense refinement, strategy mixture and multi-factor
/// decoder over one parameter set.
template <typename T>
class MiscModel {
 public:
  explicit MiscModel(const ModelConfig& config) : config_(config) {
    config.arch.validate();
    if (config.vocab_size <= static_cast<std::size_t>(corpus::kNumReserved)) {
      throw ContractError("vocabulary too small for a model");
    }
    numerics::Rng rng(config.seed);
    const std::size_t d = config.arch.model_dim;
    auto& tokens = params_.add("embed.tokens", numerics::normal_tensor<T>({config.vocab_size, d}, rng));
    encoder_ = encoder::TransformerEncoder<T>(params_, "encoder", config.arch, tokens, rng);
    refine_situation_ = numerics::LayerNorm<T>::create(params_, "refine.situation_norm", d);
    refine_post_ = numerics::LayerNorm<T>::create(params_, "refine.post_norm", d);
    strategy_ = strategy::StrategyHead<T>(params_, "strategy", d, rng);
    decoder_ = decoder::TransformerDecoder<T>(params_, "decoder", config.arch, config.vocab_size, tokens, rng,
                                              config.separate_factor_projections);
  }

  MiscModel(const MiscModel&) = delete;
  MiscModel& operator=(const MiscModel&) = delete;

  const ModelConfig& config() const noexcept { return config_; }
  numerics::ParameterSet<T>& parameters() noexcept { return params_; }
  const numerics::ParameterSet<T>& parameters() const noexcept { return params_; }
  const encoder::TransformerEncoder<T>& encoder() const noexcept { return encoder_; }
  const decoder::TransformerDecoder<T>& decoder() const noexcept { return decoder_; }
  const strategy::StrategyHead<T>& strategy_head() const noexcept { return strategy_; }
  const numerics::LayerNorm<T>& refine_norm(commonsense::BlockSource s) const noexcept {
    return s == commonsense::BlockSource::Situation ? refine_situation_ : refine_post_;
  }

  /// Everything the decoder conditions on, computed once per example.
  EncodedFactors<T> encode(Tape<T>& tape, const ModelInput& input, const FactorFlags& flags) const {
    EncodedFactors<T> out;
    out.context = encoder::encode_context(tape, encoder_, input.context);
    if (flags.use_s) {
      out.situation = encoder::refine_blocks(tape, encoder::encode_blocks(tape, encoder_, input.situation_ids),
                                             out.context, refine_situation_, config_.refine_include_cls);
    }
    if (flags.use_x) {
      out.post = encoder::refine_blocks(tape, encoder::encode_blocks(tape, encoder_, input.post_ids), out.context,
                                        refine_post_, config_.refine_include_cls);
    }
    if (flags.use_g) {
      out.prediction = strategy_.predict(tape, out.context.cls_state);
      Var<T> weights = out.prediction->distribution;
      if (flags.gold_strategy_mixing) {
        Tensor<T> gold({1, strategy::kNumStrategies});
        gold[static_cast<std::size_t>(input.strategy)] = T{1};
        weights = tape.constant(std::move(gold));
      } else if (config_.strategy_mode == StrategyMode::Single) {
        weights = tape.constant(strategy::one_hot_select(weights.value()));
      }
      out.strategy_vector = strategy::mix(weights, strategy_.codebook(tape));
    }
    out.factors.context = out.context.states;
    if (out.situation) out.factors.situation = out.situation->refined;
    if (out.post) out.factors.post = out.post->refined;
    out.factors.strategy = out.strategy_vector;
    out.factors.use_s = flags.use_s;
    out.factors.use_x = flags.use_x;
    out.factors.use_g = flags.use_g;
    return out;
  }

  decoder::DecoderOutput<T> decode(Tape<T>& tape, const EncodedFactors<T>& encoded, const std::vector<int>& prefix) const {
    return decoder_.forward(tape, prefix, encoded.factors);
  }

  /// [BOS, r₁…] decoder input and [r₁…, EOS] targets, clipped to max_positions.
  std::pair<std::vector<int>, std::vector<int>> teacher_forcing(const std::vector<int>& response) const {
    const std::size_t keep = std::min(response.size(), config_.arch.max_positions - 1);
    std::vector<int> prefix{corpus::kBos};
    prefix.insert(prefix.end(), response.begin(), response.begin() + static_cast<std::ptrdiff_t>(keep));
    std::vector<int> targets(response.begin(), response.begin() + static_cast<std::ptrdiff_t>(keep));
    targets.push_back(corpus::kEos);
    return {prefix, targets};
  }

 private:
  ModelConfig config_;
  numerics::ParameterSet<T> params_;
  encoder::TransformerEncoder<T> encoder_;
  numerics::LayerNorm<T> refine_situation_;
  numerics::LayerNorm<T> refine_post_;
  strategy::StrategyHead<T> strategy_;
  decoder::TransformerDecoder<T> decoder_;
};

/// Checkpoint metadata: model configuration, vocabulary and any caller
/// extras (kept under "extra").
inline std::string checkpoint_metadata(const ModelConfig& config, const corpus::Vocabulary& vocab,
                                       const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json j = {{"model", to_json(config)}, {"vocabulary", vocab.tokens()}, {"extra", extra}};
  return j.dump();
}

template <typename T>
numerics::Checkpoint save_model(const MiscModel<T>& model, const corpus::Vocabulary& vocab,
                                const nlohmann::json& extra = nlohmann::json::object()) {
  return numerics::make_checkpoint(model.parameters(), checkpoint_metadata(model.config(), vocab, extra));
}

struct LoadedMetadata {
  ModelConfig config;
  corpus::Vocabulary vocabulary;
  nlohmann::json extra;
};

inline LoadedMetadata parse_checkpoint_metadata(const numerics::Checkpoint& ckpt) {
  try {
    const auto j = nlohmann::json::parse(ckpt.metadata);
    return {model_config_from_json(j.at("model")),
            corpus::Vocabulary::from_tokens(j.at("vocabulary").get<std::vector<std::string>>()),
            j.value("extra", nlohmann::json::object())};
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(0, std::string("checkpoint metadata: ") + e.what());
  }
}

}  // namespace misc

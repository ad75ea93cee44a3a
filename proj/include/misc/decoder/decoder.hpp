#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "misc/corpus/vocabulary.hpp"
#include "misc/encoder/encoder.hpp"
#include "misc/error.hpp"
#include "misc/numerics/layers.hpp"
#include "misc/numerics/ops.hpp"

namespace misc::decoder {

using encoder::EncoderConfig;
using numerics::Parameter;
using numerics::ParameterSet;
using numerics::Rng;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

/// Index of each conditioning factor in per-factor arrays.
enum Factor : std::size_t { kContext = 0, kSituation = 1, kPost = 2, kStrategy = 3 };
inline constexpr std::size_t kNumFactors = 4;
inline constexpr std::array<const char*, kNumFactors> kFactorNames = {"context", "situation", "post", "strategy"};

/// Encoder-side inputs to the decoder's cross attention.
template <typename T>
struct FactorSet {
  Var<T> context;                 // C (the context encoding), [L×d]
  std::optional<Var<T>> situation;  // H^s, [N_s×d]
  std::optional<Var<T>> post;       // H^x, [N_x×d]
  std::optional<Var<T>> strategy;   // h^g, [1×d]
  bool use_s = true;
  bool use_x = true;
  bool use_g = true;

  /// The factor's matrix when it is enabled and non-empty.
  std::optional<Var<T>> active(std::size_t factor) const {
    std::optional<Var<T>> v;
    switch (factor) {
      case kContext: v = context; break;
      case kSituation: if (use_s) v = situation; break;
      case kPost: if (use_x) v = post; break;
      case kStrategy: if (use_g) v = strategy; break;
      default: break;
    }
    if (v && v->rows() == 0) v.reset();
    return v;
  }
};

template <typename T>
struct FactorAttention {
  std::array<std::optional<Var<T>>, kNumFactors> outputs;  // A^c, A^s, A^x, A^g; absent = zero
  std::array<Tensor<T>, kNumFactors> weights;              // head-averaged traces, empty when absent
  Var<T> fused;                                            // O'
};

template <typename T>
struct DecoderLayer {
  numerics::MultiHeadAttention<T> self_attention;
  numerics::LayerNorm<T> self_norm;
  std::vector<numerics::MultiHeadAttention<T>> cross;  // one per factor, or a single shared module
  numerics::LayerNorm<T> cross_norm;
  numerics::FeedForward<T> feed_forward;
  numerics::LayerNorm<T> output_norm;

  const numerics::MultiHeadAttention<T>& cross_for(std::size_t factor) const {
    return cross.size() == 1 ? cross.front() : cross[factor];
  }
};

/// O' = LN(A^c + A^s + A^x + A^g + O), each A a separate cross attention
/// from the decoder states O to one factor. Disabled or empty factors
/// contribute nothing.
template <typename T>
FactorAttention<T> multi_factor_cross_attention(Tape<T>& tape, Var<T> states, const FactorSet<T>& factors,
                                                const DecoderLayer<T>& layer, T dropout_rate = T{0}) {
  FactorAttention<T> out;
  bool any = false;
  for (std::size_t f = 0; f < kNumFactors; ++f) {
    auto keys = factors.active(f);
    if (!keys) continue;
    if (keys->cols() != states.cols()) {
      throw DimensionError(std::string("factor ") + kFactorNames[f] + " width " + std::to_string(keys->cols()) +
                           " differs from decoder width " + std::to_string(states.cols()));
    }
    auto attended = layer.cross_for(f)(tape, states, *keys);
    out.outputs[f] = numerics::dropout(attended.output, dropout_rate);
    out.weights[f] = std::move(attended.weights);
    any = true;
  }
  if (!any) throw ContractError("multi-factor cross attention with every factor disabled and an empty context");
  std::optional<Var<T>> total;
  for (const auto& a : out.outputs) {
    if (!a) continue;
    total = total ? numerics::add(*total, *a) : *a;
  }
  out.fused = layer.cross_norm(tape, numerics::add(*total, states));
  return out;
}

template <typename T>
struct DecoderOutput {
  Var<T> logits;  // [T_dec×V]
  std::vector<FactorAttention<T>> layers;
};

/// Post-LN transformer decoder: causal self attention, multi-factor cross
/// attention, feed-forward; then a vocabulary projection.
template <typename T>
class TransformerDecoder {
 public:
  TransformerDecoder() = default;

  TransformerDecoder(ParameterSet<T>& params, const std::string& prefix, const EncoderConfig& config,
                     std::size_t vocab_size, Parameter<T>& token_embedding, Rng& rng, bool separate_factor_projections)
      : config_(config), tokens_(&token_embedding) {
    config.validate();
    const std::size_t d = config.model_dim;
    positions_ = &params.add(prefix + ".positions", numerics::normal_tensor<T>({config.max_positions, d}, rng));
    embed_norm_ = numerics::LayerNorm<T>::create(params, prefix + ".embed_norm", d);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const std::string name = prefix + ".layer" + std::to_string(l);
      DecoderLayer<T> layer;
      layer.self_attention = numerics::MultiHeadAttention<T>::create(params, name + ".self_attn", d, config.heads, rng);
      layer.self_norm = numerics::LayerNorm<T>::create(params, name + ".self_norm", d);
      if (separate_factor_projections) {
        for (std::size_t f = 0; f < kNumFactors; ++f) {
          layer.cross.push_back(numerics::MultiHeadAttention<T>::create(
              params, name + ".cross_" + kFactorNames[f], d, config.heads, rng));
        }
      } else {
        layer.cross.push_back(numerics::MultiHeadAttention<T>::create(params, name + ".cross", d, config.heads, rng));
      }
      layer.cross_norm = numerics::LayerNorm<T>::create(params, name + ".cross_norm", d);
      layer.feed_forward = numerics::FeedForward<T>::create(params, name + ".ffn", d, config.ffn_dim, rng);
      layer.output_norm = numerics::LayerNorm<T>::create(params, name + ".out_norm", d);
      layers_.push_back(std::move(layer));
    }
    lm_head_ = numerics::Linear<T>::create(params, prefix + ".lm_head", d, vocab_size, rng);
  }

  const EncoderConfig& config() const noexcept { return config_; }
  const std::vector<DecoderLayer<T>>& layers() const noexcept { return layers_; }

  /// Logits for every prefix position. `prefix` starts with BOS.
  DecoderOutput<T> forward(Tape<T>& tape, const std::vector<int>& prefix, const FactorSet<T>& factors) const {
    if (prefix.empty() || prefix.front() != corpus::kBos) throw ContractError("decoder prefix must begin with BOS");
    if (prefix.size() > config_.max_positions) throw ContractError("decoder prefix exceeds max_positions");
    const T rate = static_cast<T>(config_.dropout);
    std::vector<int> positions(prefix.size());
    for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
    Var<T> x = numerics::add(numerics::embedding_lookup(tape.parameter(*tokens_), prefix),
                             numerics::embedding_lookup(tape.parameter(*positions_), positions));
    x = numerics::dropout(embed_norm_(tape, x), rate);
    numerics::AttentionMask causal;
    causal.causal = true;
    DecoderOutput<T> out;
    for (const auto& layer : layers_) {
      auto attended = layer.self_attention(tape, x, x, causal);
      Var<T> o = layer.self_norm(tape, numerics::add(x, numerics::dropout(attended.output, rate)));
      auto fusion = multi_factor_cross_attention(tape, o, factors, layer, rate);
      x = layer.output_norm(tape, numerics::add(fusion.fused, numerics::dropout(layer.feed_forward(tape, fusion.fused, rate), rate)));
      out.layers.push_back(std::move(fusion));
    }
    out.logits = lm_head_(tape, x);
    return out;
  }

 private:
  EncoderConfig config_;
  Parameter<T>* tokens_ = nullptr;
  Parameter<T>* positions_ = nullptr;
  numerics::LayerNorm<T> embed_norm_;
  std::vector<DecoderLayer<T>> layers_;
  numerics::Linear<T> lm_head_;
};

}  // namespace misc::decoder

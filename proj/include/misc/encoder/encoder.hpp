#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "misc/corpus/types.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "misc/error.hpp"
#include "misc/numerics/layers.hpp"
#include "misc/numerics/ops.hpp"

namespace misc::encoder {

using numerics::Parameter;
using numerics::ParameterSet;
using numerics::Rng;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

/// Transformer dimensions, shared by the encoder and the decoder.
struct EncoderConfig {
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t model_dim = 64;
  std::size_t ffn_dim = 128;
  std::size_t max_positions = 256;
  double dropout = 0.1;

  void validate() const {
    if (layers == 0 || heads == 0 || model_dim < 2 || ffn_dim == 0 || max_positions < 2) {
      throw ContractError("encoder config has a zero dimension");
    }
    if (model_dim % heads != 0) throw ContractError("model_dim must be divisible by heads");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw ContractError("dropout must lie in [0, 1)");
  }
};

template <typename T>
struct EncoderLayer {
  numerics::MultiHeadAttention<T> self_attention;
  numerics::LayerNorm<T> attention_norm;
  numerics::FeedForward<T> feed_forward;
  numerics::LayerNorm<T> output_norm;
};

/// Post-LN transformer encoder over token ids. The token table is owned by
/// the caller (shared with the decoder).
template <typename T>
class TransformerEncoder {
 public:
  TransformerEncoder() = default;

  TransformerEncoder(ParameterSet<T>& params, const std::string& prefix, const EncoderConfig& config,
                     Parameter<T>& token_embedding, Rng& rng)
      : config_(config), tokens_(&token_embedding) {
    config.validate();
    const std::size_t d = config.model_dim;
    positions_ = &params.add(prefix + ".positions", numerics::normal_tensor<T>({config.max_positions, d}, rng));
    embed_norm_ = numerics::LayerNorm<T>::create(params, prefix + ".embed_norm", d);
    for (std::size_t l = 0; l < config.layers; ++l) {
      const std::string name = prefix + ".layer" + std::to_string(l);
      layers_.push_back({numerics::MultiHeadAttention<T>::create(params, name + ".self_attn", d, config.heads, rng),
                         numerics::LayerNorm<T>::create(params, name + ".attn_norm", d),
                         numerics::FeedForward<T>::create(params, name + ".ffn", d, config.ffn_dim, rng),
                         numerics::LayerNorm<T>::create(params, name + ".out_norm", d)});
    }
  }

  const EncoderConfig& config() const noexcept { return config_; }

  /// States [L×d] for token ids at the given positions. `mask` may carry
  /// segment ids so several independent sequences share one pass.
  Var<T> forward(Tape<T>& tape, const std::vector<int>& ids, const std::vector<int>& positions,
                 const numerics::AttentionMask& mask = {}) const {
    for (int p : positions) {
      if (p < 0 || static_cast<std::size_t>(p) >= config_.max_positions) {
        throw ContractError("position " + std::to_string(p) + " exceeds max_positions");
      }
    }
    const T rate = static_cast<T>(config_.dropout);
    Var<T> x = add(numerics::embedding_lookup(tape.parameter(*tokens_), ids),
                   numerics::embedding_lookup(tape.parameter(*positions_), positions));
    x = numerics::dropout(embed_norm_(tape, x), rate);
    for (const auto& layer : layers_) {
      auto attended = layer.self_attention(tape, x, x, mask);
      x = layer.attention_norm(tape, add(x, numerics::dropout(attended.output, rate)));
      x = layer.output_norm(tape, add(x, numerics::dropout(layer.feed_forward(tape, x, rate), rate)));
    }
    return x;
  }

 private:
  EncoderConfig config_;
  Parameter<T>* tokens_ = nullptr;
  Parameter<T>* positions_ = nullptr;
  numerics::LayerNorm<T> embed_norm_;
  std::vector<EncoderLayer<T>> layers_;
};

struct ContextLayout {
  std::vector<int> ids;                  // [CLS, u1, EOS, u2, EOS, ..., un, EOS]
  std::size_t cls_position = 0;
  std::vector<std::size_t> eos_positions;
  std::size_t dropped_utterances = 0;    // oldest utterances removed to fit max_positions
};

template <typename T>
struct ContextEncoding {
  Var<T> states;     // C, [L×d]
  Var<T> cls_state;  // C₁, [1×d]
  ContextLayout layout;
};

/// Token layout for a context. Oldest utterances are dropped first when the
/// sequence would exceed `max_positions`; a lone oversized utterance keeps its
/// most recent tokens.
inline ContextLayout layout_context(const std::vector<std::vector<int>>& utterances, std::size_t max_positions) {
  if (utterances.empty()) throw ContractError("cannot encode an empty context");
  std::size_t first = 0;
  auto length_from = [&](std::size_t start) {
    std::size_t n = 1;
    for (std::size_t i = start; i < utterances.size(); ++i) n += utterances[i].size() + 1;
    return n;
  };
  while (first + 1 < utterances.size() && length_from(first) > max_positions) ++first;
  ContextLayout layout;
  layout.dropped_utterances = first;
  layout.ids.push_back(corpus::kCls);
  for (std::size_t i = first; i < utterances.size(); ++i) {
    const auto& u = utterances[i];
    const std::size_t room = max_positions - layout.ids.size() - 1;
    const std::size_t keep = std::min(u.size(), room);
    layout.ids.insert(layout.ids.end(), u.end() - static_cast<std::ptrdiff_t>(keep), u.end());
    layout.eos_positions.push_back(layout.ids.size());
    layout.ids.push_back(corpus::kEos);
  }
  return layout;
}

template <typename T>
ContextEncoding<T> encode_context(Tape<T>& tape, const TransformerEncoder<T>& encoder,
                                  const std::vector<std::vector<int>>& utterances) {
  ContextEncoding<T> out;
  out.layout = layout_context(utterances, encoder.config().max_positions);
  std::vector<int> positions(out.layout.ids.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
  out.states = encoder.forward(tape, out.layout.ids, positions);
  out.cls_state = numerics::slice_rows(out.states, 0, 1);
  return out;
}

template <typename T>
ContextEncoding<T> encode_context(Tape<T>& tape, const TransformerEncoder<T>& encoder,
                                  const corpus::Vocabulary& vocabulary, const std::vector<corpus::Utterance>& context) {
  std::vector<std::vector<int>> ids;
  for (const auto& u : context) ids.push_back(vocabulary.encode(u.text));
  return encode_context(tape, encoder, ids);
}

/// Encodes every block with the shared encoder in one packed pass (attention
/// confined to each block) and returns the first-token state of each block,
/// [N×d]. N = 0 yields a 0×d matrix.
template <typename T>
Var<T> encode_blocks(Tape<T>& tape, const TransformerEncoder<T>& encoder, const std::vector<std::vector<int>>& blocks) {
  const std::size_t d = encoder.config().model_dim;
  if (blocks.empty()) return tape.constant(Tensor<T>({0, d}));
  std::vector<int> ids;
  std::vector<int> positions;
  numerics::AttentionMask mask;
  std::vector<std::size_t> starts;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t room = encoder.config().max_positions - 2;
    const std::size_t keep = std::min(blocks[b].size(), room);
    starts.push_back(ids.size());
    std::vector<int> seq;
    seq.push_back(corpus::kCls);
    seq.insert(seq.end(), blocks[b].begin(), blocks[b].begin() + static_cast<std::ptrdiff_t>(keep));
    seq.push_back(corpus::kEos);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      ids.push_back(seq[i]);
      positions.push_back(static_cast<int>(i));
      mask.query_segments.push_back(static_cast<int>(b));
    }
  }
  mask.key_segments = mask.query_segments;
  Var<T> states = encoder.forward(tape, ids, positions, mask);
  return numerics::gather_rows(states, starts);
}

template <typename T>
Var<T> encode_blocks(Tape<T>& tape, const TransformerEncoder<T>& encoder, const corpus::Vocabulary& vocabulary,
                     const std::vector<std::string>& tails) {
  std::vector<std::vector<int>> ids;
  for (const auto& t : tails) ids.push_back(vocabulary.encode(t));
  return encode_blocks(tape, encoder, ids);
}

template <typename T>
struct RefinedBlocks {
  Var<T> raw;          // Ĥ, [N×d]
  Var<T> refined;      // H = LN(Ĥ + Z), [N×d]
  Tensor<T> weights;   // softmax(Ĥ·Cᵀ), [N×L]
};

/// Context-attention refinement of block encodings:
///   Z = softmax(Ĥ·Cᵀ)·C,  H = LN(Ĥ + Z).
/// With `include_cls` false the CLS row is left out of the keys.
template <typename T>
RefinedBlocks<T> refine_blocks(Tape<T>& tape, Var<T> raw, const ContextEncoding<T>& context,
                               const numerics::LayerNorm<T>& norm, bool include_cls = true) {
  Var<T> keys = context.states;
  if (!include_cls) keys = numerics::slice_rows(keys, 1, keys.rows());
  if (raw.cols() != keys.cols()) {
    throw DimensionError("refine_blocks width mismatch: " + numerics::shape_string(raw.shape()) + " and " +
                         numerics::shape_string(keys.shape()));
  }
  if (raw.rows() == 0) return {raw, raw, Tensor<T>({0, keys.rows()})};
  Var<T> weights = numerics::softmax_rows(numerics::matmul_transposed(raw, keys));
  Var<T> mixture = numerics::matmul(weights, keys);
  Var<T> refined = norm(tape, numerics::add(raw, mixture));
  return {raw, refined, weights.value()};
}

}  // namespace misc::encoder

#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "misc/error.hpp"
#include "misc/numerics/layers.hpp"
#include "misc/numerics/ops.hpp"
#include "misc/strategy/strategy_id.hpp"

namespace misc::strategy {

using numerics::Parameter;
using numerics::ParameterSet;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;

template <typename T>
struct StrategyPrediction {
  Var<T> logits;         // [1×m], pre-softmax
  Var<T> distribution;   // p^g, [1×m]
};

/// Strategy classifier (d → d → m perceptron over the CLS state) and the
/// m×d strategy codebook it mixes.
template <typename T>
class StrategyHead {
 public:
  StrategyHead() = default;

  StrategyHead(ParameterSet<T>& params, const std::string& prefix, std::size_t model_dim, numerics::Rng& rng) {
    hidden_ = numerics::Linear<T>::create(params, prefix + ".mlp.hidden", model_dim, model_dim, rng);
    classify_ = numerics::Linear<T>::create(params, prefix + ".mlp.out", model_dim, kNumStrategies, rng);
    codebook_ = &params.add(prefix + ".codebook", numerics::normal_tensor<T>({kNumStrategies, model_dim}, rng));
  }

  StrategyPrediction<T> predict(Tape<T>& tape, Var<T> cls_state) const {
    Var<T> logits = classify_(tape, numerics::gelu(hidden_(tape, cls_state)));
    return {logits, numerics::softmax_rows(logits)};
  }

  Var<T> codebook(Tape<T>& tape) const { return tape.parameter(*codebook_); }
  Parameter<T>& codebook_parameter() const { return *codebook_; }

 private:
  numerics::Linear<T> hidden_;
  numerics::Linear<T> classify_;
  Parameter<T>* codebook_ = nullptr;
};

/// h^g = p^g · T: the probability-weighted combination of codebook rows.
template <typename T>
Var<T> mix(Var<T> distribution, Var<T> codebook) {
  if (distribution.value().numel() != codebook.rows()) {
    throw DimensionError("mix: distribution of " + std::to_string(distribution.value().numel()) +
                         " entries against codebook " + numerics::shape_string(codebook.shape()));
  }
  if (distribution.value().rank() == 1) distribution = numerics::reshape(distribution, {1, codebook.rows()});
  return numerics::matmul(distribution, codebook);
}

/// Index of the largest probability; ties go to the lowest index.
template <typename T>
std::size_t argmax(std::span<const T> values) {
  if (values.empty()) throw ContractError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

/// The sharp-limit distribution: one-hot at the argmax of `p`.
template <typename T>
Tensor<T> one_hot_select(const Tensor<T>& p) {
  Tensor<T> out(p.shape());
  out[argmax(p.data())] = T{1};
  return out;
}

/// The k strategies with the largest logits, descending; equal logits keep
/// index order.
template <typename T>
std::vector<StrategyId> top_k_strategies(std::span<const T> logits, std::size_t k) {
  if (logits.size() != kNumStrategies) throw DimensionError("expected 8 strategy logits");
  if (k < 1 || k > kNumStrategies) throw ContractError("top-k needs 1 <= k <= 8, got " + std::to_string(k));
  std::vector<std::size_t> order(kNumStrategies);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return logits[a] > logits[b]; });
  std::vector<StrategyId> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back(static_cast<StrategyId>(order[i]));
  return out;
}

}  // namespace misc::strategy

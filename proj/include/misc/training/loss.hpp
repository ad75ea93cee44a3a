#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "misc/error.hpp"
#include "misc/model.hpp"
#include "misc/numerics/ops.hpp"

namespace misc::training {

struct LossReport {
  double L_r = 0.0;   // mean per-token response NLL
  double L_g = 0.0;   // mean strategy NLL; 0 when the strategy factor is off
  double L = 0.0;     // L_r + L_g
  std::size_t tokens = 0;
  std::size_t examples = 0;
  std::size_t strategy_correct = 0;
  std::size_t step = 0;
};

template <typename T>
struct JointLoss {
  Var<T> total;
  Var<T> response;
  std::optional<Var<T>> strategy;
  LossReport report;
};

/// L = L_r + L_g over a batch. Decoder logits of all examples are stacked so
/// L_r averages over every gold token (targets end in EOS). With use_g off
/// the strategy term is dropped along with the strategy factor.
template <typename T>
JointLoss<T> joint_loss(Tape<T>& tape, const MiscModel<T>& model, std::span<const ModelInput* const> batch,
                        const FactorFlags& flags) {
  if (batch.empty()) throw ContractError("joint_loss on an empty batch");
  std::vector<Var<T>> response_logits;
  std::vector<Var<T>> strategy_logits;
  std::vector<int> targets;
  std::vector<int> golds;
  JointLoss<T> out;
  for (const ModelInput* input : batch) {
    const auto encoded = model.encode(tape, *input, flags);
    auto [prefix, gold] = model.teacher_forcing(input->response);
    response_logits.push_back(model.decode(tape, encoded, prefix).logits);
    targets.insert(targets.end(), gold.begin(), gold.end());
    if (encoded.prediction) {
      strategy_logits.push_back(encoded.prediction->logits);
      golds.push_back(input->strategy);
      const auto& l = encoded.prediction->logits.value();
      if (static_cast<int>(strategy::argmax(l.data())) == input->strategy) ++out.report.strategy_correct;
    }
  }
  out.response = numerics::cross_entropy(numerics::concat_rows(response_logits), targets, corpus::kPad);
  out.total = out.response;
  out.report.L_r = static_cast<double>(out.response.value().item());
  if (flags.use_g) {
    out.strategy = numerics::cross_entropy(numerics::concat_rows(strategy_logits), golds);
    out.total = numerics::add(out.response, *out.strategy);
    out.report.L_g = static_cast<double>(out.strategy->value().item());
  }
  out.report.L = out.report.L_r + out.report.L_g;
  out.report.tokens = targets.size();
  out.report.examples = batch.size();
  return out;
}

template <typename T>
JointLoss<T> joint_loss(Tape<T>& tape, const MiscModel<T>& model, const std::vector<ModelInput>& batch,
                        const FactorFlags& flags) {
  std::vector<const ModelInput*> ptrs;
  for (const auto& in : batch) ptrs.push_back(&in);
  return joint_loss<T>(tape, model, std::span<const ModelInput* const>(ptrs), flags);
}

/// Summed NLL of `targets` under row-wise softmax, accumulated in double.
template <typename T>
double token_nll(const Tensor<T>& logits, const std::vector<int>& targets) {
  if (logits.rows() != targets.size()) throw DimensionError("token_nll: rows and targets differ");
  double total = 0.0;
  for (std::size_t r = 0; r < targets.size(); ++r) {
    if (targets[r] == corpus::kPad) continue;
    auto row = logits.row(r);
    double peak = row[0];
    for (T v : row) peak = std::max(peak, static_cast<double>(v));
    double sum = 0.0;
    for (T v : row) sum += std::exp(static_cast<double>(v) - peak);
    total += std::log(sum) + peak - static_cast<double>(row[static_cast<std::size_t>(targets[r])]);
  }
  return total;
}

/// Eval-mode scores of a set of examples.
struct EvalScores {
  double response_nll = 0.0;
  std::size_t tokens = 0;
  double strategy_nll = 0.0;
  std::size_t strategy_correct = 0;
  std::vector<std::vector<double>> strategy_logits;  // per example; empty rows when use_g is off
  std::vector<int> gold_strategies;

  double perplexity() const { return tokens == 0 ? 1.0 : std::exp(response_nll / static_cast<double>(tokens)); }
  double mean_response_nll() const { return tokens == 0 ? 0.0 : response_nll / static_cast<double>(tokens); }
  double strategy_accuracy() const {
    return gold_strategies.empty() ? 0.0 : static_cast<double>(strategy_correct) / static_cast<double>(gold_strategies.size());
  }
  /// Mean L_r + L_g over the set, for comparing ablations.
  double joint_loss() const {
    const double g = gold_strategies.empty() ? 0.0 : strategy_nll / static_cast<double>(gold_strategies.size());
    return mean_response_nll() + g;
  }
};

template <typename T>
EvalScores score_examples(const MiscModel<T>& model, const std::vector<ModelInput>& inputs, const FactorFlags& flags) {
  EvalScores scores;
  for (const auto& input : inputs) {
    Tape<T> tape(false);
    tape.set_training(false);
    const auto encoded = model.encode(tape, input, flags);
    auto [prefix, gold] = model.teacher_forcing(input.response);
    scores.response_nll += token_nll(model.decode(tape, encoded, prefix).logits.value(), gold);
    scores.tokens += gold.size();
    scores.gold_strategies.push_back(input.strategy);
    if (encoded.prediction) {
      const auto& l = encoded.prediction->logits.value();
      scores.strategy_logits.emplace_back(l.data().begin(), l.data().end());
      scores.strategy_nll += token_nll(l, {input.strategy});
      if (static_cast<int>(strategy::argmax(l.data())) == input.strategy) ++scores.strategy_correct;
    } else {
      scores.strategy_logits.emplace_back();
    }
  }
  return scores;
}

}  // namespace misc::training

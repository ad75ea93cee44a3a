#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "misc/format.hpp"
#include "misc/model.hpp"
#include "misc/numerics/random.hpp"
#include "misc/training/config.hpp"
#include "misc/training/loss.hpp"
#include "misc/training/optimizer.hpp"

namespace misc::training {

struct LogRow {
  std::size_t step = 0;
  double lr = 0.0;
  double L_r = 0.0;
  double L_g = 0.0;
  double L = 0.0;
  std::optional<double> dev_ppl;  // filled on the last step of an epoch
};

struct TrainResult {
  std::vector<LogRow> log;
  std::vector<double> epoch_dev_ppl;
  std::optional<double> best_dev_ppl;
  std::size_t best_epoch = 0;
  std::size_t steps = 0;
  std::size_t skipped_steps = 0;
  std::vector<std::string> skip_reasons;
  LossReport last;
};

inline std::string log_to_csv(const std::vector<LogRow>& log) {
  std::string out = "step,lr,L_r,L_g,L,dev_ppl\n";
  for (const auto& r : log) {
    out += std::to_string(r.step) + ',' + format_real(r.lr) + ',' + format_real(r.L_r) + ',' + format_real(r.L_g) + ',' +
           format_real(r.L) + ',' + (r.dev_ppl ? format_real(*r.dev_ppl) : std::string()) + '\n';
  }
  return out;
}

inline std::size_t planned_steps(const TrainConfig& config, std::size_t examples) {
  const std::size_t per_epoch = (examples + config.train_batch - 1) / config.train_batch;
  const std::size_t total = per_epoch * config.epochs;
  return config.max_steps ? std::min(total, config.max_steps) : total;
}

using StepCallback = std::function<void(const LogRow&, const LossReport&)>;

/// Shuffled mini-batch training with joint loss, clipping and AdamW; dev
/// perplexity after every epoch, keeping the best weights.
template <typename T>
TrainResult train(const TrainConfig& config, MiscModel<T>& model, const std::vector<ModelInput>& train_set,
                  const std::vector<ModelInput>& dev_set, const StepCallback& on_step = {}) {
  config.validate();
  if (train_set.empty()) throw ContractError("training set is empty");
  const FactorFlags flags = config.flags();
  auto& params = model.parameters();
  const std::size_t total = planned_steps(config, train_set.size());
  numerics::Rng order_rng(numerics::mix_seed(config.seed, 0x5eed));
  AdamWState<T> state;
  TrainResult result;
  std::vector<numerics::Tensor<T>> best;
  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs && step < total; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size() && step < total; start += config.train_batch) {
      std::vector<const ModelInput*> batch;
      for (std::size_t i = start; i < std::min(order.size(), start + config.train_batch); ++i) batch.push_back(&train_set[order[i]]);
      ++step;
      Tape<T> tape(true, numerics::mix_seed(config.seed, step));
      tape.set_training(true);
      params.zero_grad();
      auto loss = joint_loss<T>(tape, model, std::span<const ModelInput* const>(batch), flags);
      tape.backward(loss.total);
      if (config.clip_norm > 0.0) clip_grad_norm(params, config.clip_norm);
      const double lr = lr_schedule(step, config, total);
      const auto outcome = adamw_step(params, state, adamw_hyper(config, lr));
      if (!outcome.applied) {
        ++result.skipped_steps;
        result.skip_reasons.push_back("step " + std::to_string(step) + ": " + outcome.reason);
      }
      loss.report.step = step;
      result.last = loss.report;
      result.log.push_back({step, lr, loss.report.L_r, loss.report.L_g, loss.report.L, std::nullopt});
      if (on_step) on_step(result.log.back(), loss.report);
    }
    if (!dev_set.empty()) {
      const double ppl = score_examples(model, dev_set, flags).perplexity();
      result.log.back().dev_ppl = ppl;
      result.epoch_dev_ppl.push_back(ppl);
      if (!result.best_dev_ppl || ppl < *result.best_dev_ppl) {
        result.best_dev_ppl = ppl;
        result.best_epoch = epoch;
        if (config.restore_best) best = params.snapshot();
      }
    }
  }
  result.steps = step;
  if (config.restore_best && !best.empty()) params.restore(best);
  return result;
}

}  // namespace misc::training

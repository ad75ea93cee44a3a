#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "misc/error.hpp"
#include "misc/model.hpp"

namespace misc::training {

struct TrainConfig {
  double lr = 2e-5;
  std::size_t warmup_steps = 120;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
  std::size_t epochs = 8;
  std::size_t train_batch = 20;
  std::size_t eval_batch = 50;
  std::uint64_t seed = 0;
  bool use_g = true;
  bool use_s = true;
  bool use_x = true;
  bool gold_strategy_mixing = false;
  std::size_t max_steps = 0;  // 0: no cap beyond epochs
  double clip_norm = 1.0;     // 0 disables clipping
  bool constant_lr = false;   // hold lr after warmup instead of decaying
  bool restore_best = true;   // leave the best-dev-PPL weights in the model

  FactorFlags flags() const { return {use_g, use_s, use_x, gold_strategy_mixing}; }

  void validate() const {
    if (!(lr > 0.0)) throw ContractError("lr must be positive");
    if (train_batch == 0 || eval_batch == 0) throw ContractError("batch sizes must be positive");
    if (epochs == 0) throw ContractError("epochs must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ContractError("betas must lie in [0, 1)");
    if (!(eps > 0.0)) throw ContractError("eps must be positive");
    if (weight_decay < 0.0 || clip_norm < 0.0) throw ContractError("weight_decay and clip_norm must be non-negative");
  }
};

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"warmup_steps", c.warmup_steps},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"weight_decay", c.weight_decay},
          {"epochs", c.epochs},
          {"train_batch", c.train_batch},
          {"eval_batch", c.eval_batch},
          {"seed", c.seed},
          {"use_g", c.use_g},
          {"use_s", c.use_s},
          {"use_x", c.use_x},
          {"gold_strategy_mixing", c.gold_strategy_mixing},
          {"max_steps", c.max_steps},
          {"clip_norm", c.clip_norm},
          {"constant_lr", c.constant_lr},
          {"restore_best", c.restore_best}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig c = {}) {
  c.lr = j.value("lr", c.lr);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.epochs = j.value("epochs", c.epochs);
  c.train_batch = j.value("train_batch", c.train_batch);
  c.eval_batch = j.value("eval_batch", c.eval_batch);
  c.seed = j.value("seed", c.seed);
  c.use_g = j.value("use_g", c.use_g);
  c.use_s = j.value("use_s", c.use_s);
  c.use_x = j.value("use_x", c.use_x);
  c.gold_strategy_mixing = j.value("gold_strategy_mixing", c.gold_strategy_mixing);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.constant_lr = j.value("constant_lr", c.constant_lr);
  c.restore_best = j.value("restore_best", c.restore_best);
  c.validate();
  return c;
}

}  // namespace misc::training

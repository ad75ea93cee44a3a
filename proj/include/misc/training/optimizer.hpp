#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "misc/error.hpp"
#include "misc/numerics/tape.hpp"
#include "misc/training/config.hpp"

namespace misc::training {

struct AdamWHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

inline AdamWHyper adamw_hyper(const TrainConfig& c, double lr) { return {lr, c.beta1, c.beta2, c.eps, c.weight_decay}; }

template <typename T>
struct AdamWState {
  std::vector<numerics::Tensor<T>> m;
  std::vector<numerics::Tensor<T>> v;
  std::size_t step = 0;  // updates applied so far
};

struct StepOutcome {
  bool applied = false;
  std::string reason;  // why a step was skipped
};

/// One AdamW update with bias correction and decoupled weight decay
/// (θ ← θ − lr·wd·θ, then the Adam step). Parameters flagged no-decay skip
/// the decay term. A non-finite gradient leaves everything untouched.
template <typename T>
StepOutcome adamw_step(numerics::ParameterSet<T>& params, AdamWState<T>& state, const AdamWHyper& h) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!params[i].grad.all_finite()) return {false, "non-finite gradient in " + params[i].name};
  }
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m.emplace_back(params[i].value.shape());
      state.v.emplace_back(params[i].value.shape());
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    auto theta = p.value.data();
    auto g = p.grad.data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    const double decay = p.decay ? h.lr * h.weight_decay : 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = static_cast<double>(g[k]);
      const double mk = h.beta1 * static_cast<double>(m[k]) + (1.0 - h.beta1) * gk;
      const double vk = h.beta2 * static_cast<double>(v[k]) + (1.0 - h.beta2) * gk * gk;
      m[k] = static_cast<T>(mk);
      v[k] = static_cast<T>(vk);
      double th = static_cast<double>(theta[k]);
      th -= decay * th;
      th -= h.lr * (mk / c1) / (std::sqrt(vk / c2) + h.eps);
      theta[k] = static_cast<T>(th);
    }
  }
  return {true, {}};
}

/// Scales gradients so their global L2 norm is at most `max_norm`; returns
/// the norm before scaling.
template <typename T>
double clip_grad_norm(numerics::ParameterSet<T>& params, double max_norm) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i)
    for (T g : params[i].grad.data()) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm && std::isfinite(norm)) {
    const T factor = static_cast<T>(max_norm / (norm + 1e-6));
    for (std::size_t i = 0; i < params.size(); ++i)
      for (T& g : params[i].grad.data()) g *= factor;
  }
  return norm;
}

/// Linear warmup 0 → lr over `warmup_steps`, then linear decay to 0 at
/// `total_steps` (or held at lr with constant_lr). `step` counts updates,
/// so the first update uses step 1.
inline double lr_schedule(std::size_t step, const TrainConfig& config, std::size_t total_steps) {
  const double lr = config.lr;
  const auto s = static_cast<double>(step);
  if (step < config.warmup_steps) return lr * s / static_cast<double>(config.warmup_steps);
  if (config.constant_lr) return lr;
  if (step >= total_steps) return 0.0;
  return lr * static_cast<double>(total_steps - step) / static_cast<double>(total_steps - config.warmup_steps);
}

}  // namespace misc::training

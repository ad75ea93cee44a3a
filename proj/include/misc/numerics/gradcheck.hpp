#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "misc/numerics/random.hpp"
#include "misc/numerics/tape.hpp"

namespace misc::numerics {

struct GradCheckOptions {
  double h = 1e-5;
  double tolerance = 1e-4;
  std::size_t samples_per_parameter = 6;
  std::uint64_t seed = 0;
  // Relative error is |analytic − numeric| / max(|analytic|, |numeric|, floor).
  // Central differences at h = 1e-5 resolve a gradient entry only to about
  // 1e-10 absolute (O(h²) truncation plus round-off), so entries smaller than
  // the floor are in effect held to tolerance·floor absolute error. Some
  // entries are exactly zero (attention key biases).
  double denominator_floor = 1e-5;
};

struct GradCheckEntry {
  std::string name;
  std::size_t checked = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;

  bool passed() const {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.passed; });
  }
  double max_relative_error() const {
    double worst = 0.0;
    for (const auto& e : entries) worst = std::max(worst, e.max_relative_error);
    return worst;
  }
};

template <typename T>
using LossBuilder = std::function<Var<T>(Tape<T>&)>;

/// Compares `analytic` (one tensor per parameter, registration order) with
/// central differences (f(θ+h) − f(θ−h)) / 2h on a random subsample of
/// entries per parameter. Failures are reported, never thrown.
template <typename T>
GradCheckReport grad_check(ParameterSet<T>& params, const LossBuilder<T>& build,
                           const std::vector<Tensor<T>>& analytic, const GradCheckOptions& options = {}) {
  GradCheckReport report;
  Rng rng(options.seed);
  auto evaluate = [&build] {
    Tape<T> tape(false);
    return static_cast<double>(tape.value(build(tape)).item());
  };
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    GradCheckEntry entry;
    entry.name = p.name;
    const std::size_t n = p.value.numel();
    std::vector<std::size_t> picks(n);
    std::iota(picks.begin(), picks.end(), std::size_t{0});
    rng.shuffle(picks);
    picks.resize(std::min(n, options.samples_per_parameter));
    for (std::size_t k : picks) {
      const T saved = p.value[k];
      p.value[k] = static_cast<T>(saved + options.h);
      const double up = evaluate();
      p.value[k] = static_cast<T>(saved - options.h);
      const double down = evaluate();
      p.value[k] = saved;
      const double numeric = (up - down) / (2.0 * options.h);
      const double exact = static_cast<double>(analytic[i][k]);
      const double abs_err = std::abs(exact - numeric);
      const double denom = std::max({std::abs(exact), std::abs(numeric), options.denominator_floor});
      const double rel = abs_err / denom;
      entry.max_absolute_error = std::max(entry.max_absolute_error, abs_err);
      entry.max_relative_error = std::max(entry.max_relative_error, rel);
      if (!(rel < options.tolerance)) entry.passed = false;
      ++entry.checked;
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

/// Analytic gradients from one recorded backward pass.
template <typename T>
std::vector<Tensor<T>> analytic_gradients(ParameterSet<T>& params, const LossBuilder<T>& build) {
  params.zero_grad();
  Tape<T> tape(true);
  tape.backward(build(tape));
  std::vector<Tensor<T>> grads;
  for (std::size_t i = 0; i < params.size(); ++i) grads.push_back(params[i].grad);
  return grads;
}

template <typename T>
GradCheckReport grad_check(ParameterSet<T>& params, const LossBuilder<T>& build, const GradCheckOptions& options = {}) {
  return grad_check(params, build, analytic_gradients(params, build), options);
}

}  // namespace misc::numerics

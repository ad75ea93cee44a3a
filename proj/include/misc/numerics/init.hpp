#pragma once

#include "misc/numerics/random.hpp"
#include "misc/numerics/tensor.hpp"

namespace misc::numerics {

inline constexpr double kInitStd = 0.02;

template <typename T>
Tensor<T> normal_tensor(Shape shape, Rng& rng, double stddev = kInitStd) {
  Tensor<T> out(std::move(shape));
  for (auto& v : out.storage()) v = static_cast<T>(rng.normal() * stddev);
  return out;
}

template <typename T>
Tensor<T> ones(Shape shape) {
  return Tensor<T>(std::move(shape), T{1});
}

}  // namespace misc::numerics

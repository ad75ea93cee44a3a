#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "misc/decoder/sampling.hpp"
#include "misc/model.hpp"

namespace misc::decoder {

template <typename T>
struct Generation {
  std::vector<int> tokens;             // without BOS/EOS
  std::vector<T> strategy_logits;      // empty when the strategy factor is off
};

/// Autoregressive decoding until EOS or `max_length` tokens. Runs in eval
/// mode on a gradient-free tape; the same seed gives the same output.
template <typename T>
Generation<T> generate(const MiscModel<T>& model, const ModelInput& input, const GenerationConfig& config,
                       std::uint64_t seed, const FactorFlags& flags = {}) {
  config.validate();
  Tape<T> tape(false, seed);
  tape.set_training(false);
  numerics::Rng rng(seed);
  Generation<T> out;
  const auto encoded = model.encode(tape, input, flags);
  if (encoded.prediction) {
    const auto& l = encoded.prediction->logits.value();
    out.strategy_logits.assign(l.data().begin(), l.data().end());
  }
  std::vector<int> prefix{corpus::kBos};
  const std::size_t limit = std::min(config.max_length, model.config().arch.max_positions - 1);
  while (out.tokens.size() < limit) {
    const auto decoded = model.decode(tape, encoded, prefix);
    const auto& logits = decoded.logits.value();
    const int next = sample_token<T>(logits.row(logits.rows() - 1), config, out.tokens, rng);
    if (next == corpus::kEos) break;
    out.tokens.push_back(next);
    prefix.push_back(next);
  }
  return out;
}

}  // namespace misc::decoder

#pragma once

#include <string>

#include "misc/numerics/init.hpp"
#include "misc/numerics/ops.hpp"
#include "misc/numerics/tape.hpp"

namespace misc::numerics {

/// x·W + b with W [in×out].
template <typename T>
struct Linear {
  Parameter<T>* weight = nullptr;
  Parameter<T>* bias = nullptr;

  static Linear create(ParameterSet<T>& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    Linear l;
    l.weight = &params.add(name + ".weight", normal_tensor<T>({in, out}, rng));
    l.bias = &params.add(name + ".bias", Tensor<T>({out}), false);
    return l;
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x) const {
    return add_bias(matmul(x, tape.parameter(*weight)), tape.parameter(*bias));
  }
};

template <typename T>
struct LayerNorm {
  Parameter<T>* gain = nullptr;
  Parameter<T>* shift = nullptr;
  T eps = T{1e-5};

  static LayerNorm create(ParameterSet<T>& params, const std::string& name, std::size_t d, T eps = T{1e-5}) {
    LayerNorm ln;
    ln.gain = &params.add(name + ".gain", ones<T>({d}), false);
    ln.shift = &params.add(name + ".shift", Tensor<T>({d}), false);
    ln.eps = eps;
    return ln;
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x) const {
    return layer_norm(x, tape.parameter(*gain), tape.parameter(*shift), eps);
  }
};

/// Multi-head attention with its own query/key/value/output projections.
template <typename T>
struct MultiHeadAttention {
  Linear<T> query, key, value, output;
  std::size_t heads = 1;

  static MultiHeadAttention create(ParameterSet<T>& params, const std::string& name, std::size_t d, std::size_t heads,
                                   Rng& rng) {
    MultiHeadAttention m;
    m.query = Linear<T>::create(params, name + ".q", d, d, rng);
    m.key = Linear<T>::create(params, name + ".k", d, d, rng);
    m.value = Linear<T>::create(params, name + ".v", d, d, rng);
    m.output = Linear<T>::create(params, name + ".o", d, d, rng);
    m.heads = heads;
    return m;
  }

  AttentionResult<T> operator()(Tape<T>& tape, Var<T> queries, Var<T> keys, const AttentionMask& mask = {}) const {
    auto attended = attention(query(tape, queries), key(tape, keys), value(tape, keys), heads, mask);
    attended.output = output(tape, attended.output);
    return attended;
  }
};

template <typename T>
struct FeedForward {
  Linear<T> expand, project;

  static FeedForward create(ParameterSet<T>& params, const std::string& name, std::size_t d, std::size_t hidden,
                            Rng& rng) {
    return {Linear<T>::create(params, name + ".fc1", d, hidden, rng),
            Linear<T>::create(params, name + ".fc2", hidden, d, rng)};
  }

  Var<T> operator()(Tape<T>& tape, Var<T> x, T dropout_rate) const {
    return project(tape, dropout(gelu(expand(tape, x)), dropout_rate));
  }
};

}  // namespace misc::numerics

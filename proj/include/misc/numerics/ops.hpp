#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "misc/error.hpp"
#include "misc/numerics/tape.hpp"
#include "misc/numerics/tensor.hpp"

// Differentiable operations over tape variables. Each op computes its value
// eagerly and records a closure that maps the output gradient onto its
// inputs. Matrices are row-major; rank-1 tensors act as one row.

namespace misc::numerics {

namespace detail {

template <typename T>
void accumulate(Tensor<T>& dst, const Tensor<T>& src) {
  auto& d = dst.storage();
  const auto& s = src.storage();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
}

template <typename T>
void require_same_tape(Var<T> a, Var<T> b) {
  if (a.tape != b.tape) throw ContractError("operands recorded on different tapes");
}

inline std::string pair_shapes(const Shape& a, const Shape& b) {
  return shape_string(a) + " and " + shape_string(b);
}

}  // namespace detail

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul shape mismatch: " + detail::pair_shapes(av.shape(), bv.shape()));
  }
  Tensor<T> out({av.rows(), bv.cols()});
  if (!out.empty() && av.cols() > 0) as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  return a.tape->record(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) as_matrix(t.grad(ai)).noalias() += as_matrix(g) * as_matrix(t.value(bi)).transpose();
    if (t.requires_grad(bi)) as_matrix(t.grad(bi)).noalias() += as_matrix(t.value(ai)).transpose() * as_matrix(g);
  });
}

/// a · bᵀ for a [p×q], b [r×q].
template <typename T>
Var<T> matmul_transposed(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.cols() != bv.cols()) {
    throw DimensionError("matmul_transposed shape mismatch: " + detail::pair_shapes(av.shape(), bv.shape()));
  }
  Tensor<T> out({av.rows(), bv.rows()});
  if (!out.empty() && av.cols() > 0) as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv).transpose();
  return a.tape->record(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) as_matrix(t.grad(ai)).noalias() += as_matrix(g) * as_matrix(t.value(bi));
    if (t.requires_grad(bi)) as_matrix(t.grad(bi)).noalias() += as_matrix(g).transpose() * as_matrix(t.value(ai));
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  const auto& av = a.value();
  Tensor<T> out({av.cols(), av.rows()});
  as_matrix(out) = as_matrix(av).transpose();
  return a.tape->record(std::move(out), {a}, [ai = a.id](Tape<T>& t, std::size_t self) {
    as_matrix(t.grad(ai)) += as_matrix(t.grad(self)).transpose();
  });
}

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  detail::require_same_tape(a, b);
  const auto& av = a.value();
  const auto& bv = b.value();
  if (av.rows() != bv.rows() || av.cols() != bv.cols()) {
    throw DimensionError("add shape mismatch: " + detail::pair_shapes(av.shape(), bv.shape()));
  }
  Tensor<T> out = av;
  detail::accumulate(out, bv);
  return a.tape->record(std::move(out), {a, b}, [ai = a.id, bi = b.id](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) detail::accumulate(t.grad(ai), g);
    if (t.requires_grad(bi)) detail::accumulate(t.grad(bi), g);
  });
}

/// Adds a [d] row vector to every row of a [p×d].
template <typename T>
Var<T> add_bias(Var<T> a, Var<T> bias) {
  detail::require_same_tape(a, bias);
  const auto& av = a.value();
  const auto& bv = bias.value();
  if (bv.rows() != 1 || bv.cols() != av.cols()) {
    throw DimensionError("add_bias shape mismatch: " + detail::pair_shapes(av.shape(), bv.shape()));
  }
  Tensor<T> out = av;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += bv[c];
  }
  return a.tape->record(std::move(out), {a, bias}, [ai = a.id, bi = bias.id](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    if (t.requires_grad(ai)) detail::accumulate(t.grad(ai), g);
    if (t.requires_grad(bi)) {
      auto& gb = t.grad(bi);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) gb[c] += row[c];
      }
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.storage()) v *= factor;
  return a.tape->record(std::move(out), {a}, [ai = a.id, factor](Tape<T>& t, std::size_t self) {
    auto& ga = t.grad(ai).storage();
    const auto& g = t.grad(self).storage();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += factor * g[i];
  });
}

template <typename T>
Var<T> relu(Var<T> a) {
  Tensor<T> out = a.value();
  for (auto& v : out.storage()) v = v > T{0} ? v : T{0};
  return a.tape->record(std::move(out), {a}, [ai = a.id](Tape<T>& t, std::size_t self) {
    const auto& x = t.value(ai).storage();
    const auto& g = t.grad(self).storage();
    auto& ga = t.grad(ai).storage();
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += x[i] > T{0} ? g[i] : T{0};
  });
}

/// Exact (erf) GELU.
template <typename T>
Var<T> gelu(Var<T> a) {
  Tensor<T> out = a.value();
  const T inv_sqrt2 = T{1} / std::numbers::sqrt2_v<T>;
  for (auto& v : out.storage()) v = T{0.5} * v * (T{1} + std::erf(v * inv_sqrt2));
  return a.tape->record(std::move(out), {a}, [ai = a.id, inv_sqrt2](Tape<T>& t, std::size_t self) {
    const auto& x = t.value(ai).storage();
    const auto& g = t.grad(self).storage();
    auto& ga = t.grad(ai).storage();
    const T inv_sqrt2pi = inv_sqrt2 * std::numbers::inv_sqrtpi_v<T>;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const T cdf = T{0.5} * (T{1} + std::erf(x[i] * inv_sqrt2));
      const T pdf = inv_sqrt2pi * std::exp(T{-0.5} * x[i] * x[i]);
      ga[i] += g[i] * (cdf + x[i] * pdf);
    }
  });
}

template <typename T>
Tensor<T> softmax_rows_value(const Tensor<T>& a) {
  Tensor<T> out = a;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    if (row.empty()) continue;
    const T peak = *std::max_element(row.begin(), row.end());
    T total{0};
    for (auto& v : row) {
      v = std::exp(v - peak);
      total += v;
    }
    for (auto& v : row) v /= total;
  }
  return out;
}

template <typename T>
Var<T> softmax_rows(Var<T> a) {
  return a.tape->record(softmax_rows_value(a.value()), {a}, [ai = a.id](Tape<T>& t, std::size_t self) {
    const auto& y = t.value(self);
    const auto& g = t.grad(self);
    auto& ga = t.grad(ai);
    for (std::size_t r = 0; r < y.rows(); ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      auto out = ga.row(r);
      T dot{0};
      for (std::size_t c = 0; c < yr.size(); ++c) dot += yr[c] * gr[c];
      for (std::size_t c = 0; c < yr.size(); ++c) out[c] += yr[c] * (gr[c] - dot);
    }
  });
}

/// Per-row normalization with biased (1/d) variance, then gain and shift.
template <typename T>
Var<T> layer_norm(Var<T> a, Var<T> gain, Var<T> bias, T eps = T{1e-5}) {
  detail::require_same_tape(a, gain);
  detail::require_same_tape(a, bias);
  const auto& x = a.value();
  const std::size_t d = x.cols();
  if (d < 2) throw ContractError("layer_norm needs width >= 2, got " + std::to_string(d));
  if (gain.value().numel() != d || bias.value().numel() != d) {
    throw DimensionError("layer_norm parameter shape mismatch: " +
                         detail::pair_shapes(x.shape(), gain.value().shape()));
  }
  const auto& gv = gain.value();
  const auto& bv = bias.value();
  Tensor<T> normalized(x.shape());
  Tensor<T> inv_std({x.rows()});
  Tensor<T> out(x.shape());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    T mean{0};
    for (T v : xr) mean += v;
    mean /= static_cast<T>(d);
    T var{0};
    for (T v : xr) var += (v - mean) * (v - mean);
    var /= static_cast<T>(d);
    const T is = T{1} / std::sqrt(var + eps);
    inv_std[r] = is;
    auto nr = normalized.row(r);
    auto orow = out.row(r);
    for (std::size_t c = 0; c < d; ++c) {
      nr[c] = (xr[c] - mean) * is;
      orow[c] = nr[c] * gv[c] + bv[c];
    }
  }
  return a.tape->record(
      std::move(out), {a, gain, bias},
      [ai = a.id, gi = gain.id, bi = bias.id, normalized = std::move(normalized),
       inv_std = std::move(inv_std)](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        const auto& gv = t.value(gi);
        const std::size_t d = g.cols();
        if (t.requires_grad(gi) || t.requires_grad(bi)) {
          auto& gg = t.grad(gi);
          auto& gb = t.grad(bi);
          for (std::size_t r = 0; r < g.rows(); ++r) {
            auto gr = g.row(r);
            auto nr = normalized.row(r);
            for (std::size_t c = 0; c < d; ++c) {
              gg[c] += gr[c] * nr[c];
              gb[c] += gr[c];
            }
          }
        }
        if (!t.requires_grad(ai)) return;
        auto& ga = t.grad(ai);
        std::vector<T> dn(d);
        for (std::size_t r = 0; r < g.rows(); ++r) {
          auto gr = g.row(r);
          auto nr = normalized.row(r);
          T mean_dn{0};
          T mean_dn_n{0};
          for (std::size_t c = 0; c < d; ++c) {
            dn[c] = gr[c] * gv[c];
            mean_dn += dn[c];
            mean_dn_n += dn[c] * nr[c];
          }
          mean_dn /= static_cast<T>(d);
          mean_dn_n /= static_cast<T>(d);
          auto out = ga.row(r);
          for (std::size_t c = 0; c < d; ++c) out[c] += inv_std[r] * (dn[c] - mean_dn - nr[c] * mean_dn_n);
        }
      });
}

/// Mean negative log-likelihood of `targets` under row-wise softmax of
/// `logits`, skipping positions equal to `ignore_index`.
template <typename T>
Var<T> cross_entropy(Var<T> logits, const std::vector<int>& targets,
                     std::optional<int> ignore_index = std::nullopt) {
  const auto& lv = logits.value();
  const std::size_t n = lv.rows();
  const std::size_t vocab = lv.cols();
  if (targets.size() != n) {
    throw DimensionError("cross_entropy: " + std::to_string(targets.size()) + " targets for " +
                         std::to_string(n) + " rows");
  }
  std::size_t counted = 0;
  for (int target : targets) {
    if (ignore_index && target == *ignore_index) continue;
    if (target < 0 || static_cast<std::size_t>(target) >= vocab) {
      throw IndexError("cross_entropy target " + std::to_string(target) + " outside [0, " +
                       std::to_string(vocab) + ")");
    }
    ++counted;
  }
  if (counted == 0) throw ContractError("cross_entropy: every position is ignored, loss is empty");

  Tensor<T> probs = softmax_rows_value(lv);
  T total{0};
  for (std::size_t r = 0; r < n; ++r) {
    if (ignore_index && targets[r] == *ignore_index) continue;
    auto row = lv.row(r);
    const T peak = *std::max_element(row.begin(), row.end());
    T sum{0};
    for (T v : row) sum += std::exp(v - peak);
    total += std::log(sum) + peak - row[static_cast<std::size_t>(targets[r])];
  }
  const T inv_count = T{1} / static_cast<T>(counted);
  return logits.tape->record(
      Tensor<T>::scalar(total * inv_count), {logits},
      [li = logits.id, targets, ignore_index, probs = std::move(probs), inv_count](Tape<T>& t, std::size_t self) {
        const T g = t.grad(self)[0] * inv_count;
        auto& gl = t.grad(li);
        for (std::size_t r = 0; r < targets.size(); ++r) {
          if (ignore_index && targets[r] == *ignore_index) continue;
          auto out = gl.row(r);
          auto p = probs.row(r);
          for (std::size_t c = 0; c < out.size(); ++c) out[c] += g * p[c];
          out[static_cast<std::size_t>(targets[r])] -= g;
        }
      });
}

/// Rows of `table` [V×d] selected by `ids`.
template <typename T>
Var<T> embedding_lookup(Var<T> table, const std::vector<int>& ids) {
  const auto& tv = table.value();
  Tensor<T> out({ids.size(), tv.cols()});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= tv.rows()) {
      throw IndexError("embedding id " + std::to_string(ids[i]) + " outside [0, " + std::to_string(tv.rows()) + ")");
    }
    auto src = tv.row(static_cast<std::size_t>(ids[i]));
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return table.tape->record(std::move(out), {table}, [ti = table.id, ids](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& gt = t.grad(ti);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto src = g.row(i);
      auto dst = gt.row(static_cast<std::size_t>(ids[i]));
      for (std::size_t c = 0; c < src.size(); ++c) dst[c] += src[c];
    }
  });
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows of nothing");
  const std::size_t d = parts.front().cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    detail::require_same_tape(parts.front(), p);
    if (p.cols() != d) throw DimensionError("concat_rows width mismatch: " + detail::pair_shapes(parts.front().shape(), p.shape()));
    total += p.rows();
  }
  Tensor<T> out({total, d});
  std::vector<std::size_t> offsets;
  std::size_t at = 0;
  for (const auto& p : parts) {
    offsets.push_back(at);
    const auto& src = p.value().storage();
    std::copy(src.begin(), src.end(), out.storage().begin() + static_cast<std::ptrdiff_t>(at * d));
    at += p.rows();
  }
  std::vector<std::size_t> ids;
  for (const auto& p : parts) ids.push_back(p.id);
  return parts.front().tape->record(std::move(out), parts, [ids, offsets, d](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self).storage();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!t.requires_grad(ids[k])) continue;
      auto& dst = t.grad(ids[k]).storage();
      const std::size_t base = offsets[k] * d;
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[base + i];
    }
  });
}

/// Rows [begin, end) of a matrix.
template <typename T>
Var<T> slice_rows(Var<T> a, std::size_t begin, std::size_t end) {
  const auto& av = a.value();
  if (begin > end || end > av.rows()) {
    throw DimensionError("slice_rows [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") of " + shape_string(av.shape()));
  }
  const std::size_t d = av.cols();
  std::vector<T> data(av.storage().begin() + static_cast<std::ptrdiff_t>(begin * d),
                      av.storage().begin() + static_cast<std::ptrdiff_t>(end * d));
  return a.tape->record(Tensor<T>({end - begin, d}, std::move(data)), {a},
                        [ai = a.id, begin, d](Tape<T>& t, std::size_t self) {
                          const auto& g = t.grad(self).storage();
                          auto& dst = t.grad(ai).storage();
                          for (std::size_t i = 0; i < g.size(); ++i) dst[begin * d + i] += g[i];
                        });
}

template <typename T>
Var<T> gather_rows(Var<T> a, const std::vector<std::size_t>& rows) {
  const auto& av = a.value();
  const std::size_t d = av.cols();
  Tensor<T> out({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= av.rows()) throw IndexError("gather_rows index " + std::to_string(rows[i]));
    auto src = av.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return a.tape->record(std::move(out), {a}, [ai = a.id, rows](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self);
    auto& dst = t.grad(ai);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = g.row(i);
      auto out = dst.row(rows[i]);
      for (std::size_t c = 0; c < src.size(); ++c) out[c] += src[c];
    }
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
  if (shape_numel(shape) != a.value().numel()) {
    throw DimensionError("reshape " + shape_string(a.shape()) + " to " + shape_string(shape));
  }
  return a.tape->record(a.value().reshaped(std::move(shape)), {a}, [ai = a.id](Tape<T>& t, std::size_t self) {
    detail::accumulate(t.grad(ai), t.grad(self));
  });
}

template <typename T>
Var<T> sum(Var<T> a) {
  T total{0};
  for (T v : a.value().storage()) total += v;
  return a.tape->record(Tensor<T>::scalar(total), {a}, [ai = a.id](Tape<T>& t, std::size_t self) {
    const T g = t.grad(self)[0];
    for (auto& v : t.grad(ai).storage()) v += g;
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  const std::size_t n = a.value().numel();
  if (n == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(a), T{1} / static_cast<T>(n));
}

/// Inverted dropout; identity unless the tape is in training mode.
template <typename T>
Var<T> dropout(Var<T> a, T rate) {
  if (!a.tape->training() || rate <= T{0}) return a;
  Tensor<T> mask(a.value().shape());
  const T keep_scale = T{1} / (T{1} - rate);
  for (auto& m : mask.storage()) m = a.tape->rng().uniform() < static_cast<double>(rate) ? T{0} : keep_scale;
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= mask[i];
  return a.tape->record(std::move(out), {a}, [ai = a.id, mask = std::move(mask)](Tape<T>& t, std::size_t self) {
    const auto& g = t.grad(self).storage();
    auto& dst = t.grad(ai).storage();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * mask[i];
  });
}

/// Which query/key pairs may attend. Segment ids restrict attention to keys
/// in the query's own segment (used to pack independent sequences).
struct AttentionMask {
  bool causal = false;
  std::vector<int> query_segments;
  std::vector<int> key_segments;

  bool allowed(std::size_t q, std::size_t k) const {
    if (causal && k > q) return false;
    if (!query_segments.empty() && query_segments[q] != key_segments[k]) return false;
    return true;
  }
};

template <typename T>
struct AttentionResult {
  Var<T> output;
  Tensor<T> weights;  // [Tq×Tk], averaged over heads
};

/// Scaled dot-product attention over `heads` column groups of already
/// projected queries [Tq×d], keys [Tk×d] and values [Tk×d].
template <typename T>
AttentionResult<T> attention(Var<T> q, Var<T> k, Var<T> v, std::size_t heads, const AttentionMask& mask = {}) {
  detail::require_same_tape(q, k);
  detail::require_same_tape(q, v);
  const auto& qv = q.value();
  const auto& kv = k.value();
  const auto& vv = v.value();
  const std::size_t tq = qv.rows();
  const std::size_t tk = kv.rows();
  const std::size_t d = qv.cols();
  if (kv.cols() != d || vv.cols() != d || vv.rows() != tk) {
    throw DimensionError("attention shape mismatch: " + detail::pair_shapes(qv.shape(), kv.shape()));
  }
  if (heads == 0 || d % heads != 0) throw ContractError("attention width not divisible by head count");
  if (tk == 0) throw ContractError("attention over zero keys");
  if (!mask.query_segments.empty() && (mask.query_segments.size() != tq || mask.key_segments.size() != tk)) {
    throw DimensionError("attention segment ids do not match sequence lengths");
  }
  const std::size_t dh = d / heads;
  const T inv_sqrt = T{1} / std::sqrt(static_cast<T>(dh));

  Tensor<T> probs({heads, tq, tk});
  Tensor<T> out({tq, d});
  Tensor<T> avg({tq, tk});
  std::vector<T> scores(tk);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t off = h * dh;
    for (std::size_t i = 0; i < tq; ++i) {
      T peak = -std::numeric_limits<T>::infinity();
      bool any = false;
      for (std::size_t j = 0; j < tk; ++j) {
        if (!mask.allowed(i, j)) continue;
        T s{0};
        for (std::size_t c = 0; c < dh; ++c) s += qv(i, off + c) * kv(j, off + c);
        scores[j] = s * inv_sqrt;
        peak = std::max(peak, scores[j]);
        any = true;
      }
      if (!any) throw ContractError("attention query row " + std::to_string(i) + " has no visible keys");
      T total{0};
      T* p = &probs.storage()[(h * tq + i) * tk];
      for (std::size_t j = 0; j < tk; ++j) {
        p[j] = mask.allowed(i, j) ? std::exp(scores[j] - peak) : T{0};
        total += p[j];
      }
      for (std::size_t j = 0; j < tk; ++j) {
        p[j] /= total;
        avg(i, j) += p[j] / static_cast<T>(heads);
        if (p[j] == T{0}) continue;
        for (std::size_t c = 0; c < dh; ++c) out(i, off + c) += p[j] * vv(j, off + c);
      }
    }
  }
  Var<T> result = q.tape->record(
      std::move(out), {q, k, v},
      [qi = q.id, ki = k.id, vi = v.id, heads, dh, inv_sqrt, probs](Tape<T>& t, std::size_t self) {
        const auto& g = t.grad(self);
        const auto& qv = t.value(qi);
        const auto& kv = t.value(ki);
        const auto& vv = t.value(vi);
        const std::size_t tq = qv.rows();
        const std::size_t tk = kv.rows();
        const bool need_q = t.requires_grad(qi);
        const bool need_k = t.requires_grad(ki);
        const bool need_v = t.requires_grad(vi);
        Tensor<T>* gq = need_q ? &t.grad(qi) : nullptr;
        Tensor<T>* gk = need_k ? &t.grad(ki) : nullptr;
        Tensor<T>* gv = need_v ? &t.grad(vi) : nullptr;
        std::vector<T> dp(tk);
        for (std::size_t h = 0; h < heads; ++h) {
          const std::size_t off = h * dh;
          for (std::size_t i = 0; i < tq; ++i) {
            const T* p = &probs.storage()[(h * tq + i) * tk];
            T dot{0};
            for (std::size_t j = 0; j < tk; ++j) {
              if (p[j] == T{0}) {
                dp[j] = T{0};
                continue;
              }
              T s{0};
              for (std::size_t c = 0; c < dh; ++c) {
                s += g(i, off + c) * vv(j, off + c);
                if (gv) (*gv)(j, off + c) += p[j] * g(i, off + c);
              }
              dp[j] = s;
              dot += p[j] * s;
            }
            if (!gq && !gk) continue;
            for (std::size_t j = 0; j < tk; ++j) {
              if (p[j] == T{0}) continue;
              const T ds = p[j] * (dp[j] - dot) * inv_sqrt;
              for (std::size_t c = 0; c < dh; ++c) {
                if (gq) (*gq)(i, off + c) += ds * kv(j, off + c);
                if (gk) (*gk)(j, off + c) += ds * qv(i, off + c);
              }
            }
          }
        }
      });
  return {result, std::move(avg)};
}

}  // namespace misc::numerics

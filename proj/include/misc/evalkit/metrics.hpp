#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "misc/corpus/tokenizer.hpp"
#include "misc/error.hpp"

namespace misc::evalkit {

using Tokens = std::vector<std::string>;
using NGram = std::vector<std::string>;

inline std::vector<Tokens> tokenize_all(const std::vector<std::string>& texts) {
  std::vector<Tokens> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(corpus::tokenize(t));
  return out;
}

inline std::map<NGram, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  if (n == 0 || tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[NGram(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return counts;
}

namespace detail {

inline void require_aligned(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references, const char* metric) {
  if (candidates.empty()) throw ContractError(std::string(metric) + " of an empty corpus");
  if (candidates.size() != references.size()) {
    throw DimensionError(std::string(metric) + ": " + std::to_string(candidates.size()) + " candidates vs " +
                         std::to_string(references.size()) + " references");
  }
}

}  // namespace detail

/// Clipped n-gram matches and candidate n-gram total summed over a corpus.
struct NGramPrecision {
  std::size_t matches = 0;
  std::size_t total = 0;
};

inline NGramPrecision clipped_precision(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                                        std::size_t n) {
  detail::require_aligned(candidates, references, "clipped precision");
  NGramPrecision p;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto cand = ngram_counts(candidates[i], n);
    const auto ref = ngram_counts(references[i], n);
    for (const auto& [gram, count] : cand) {
      p.total += count;
      auto it = ref.find(gram);
      if (it != ref.end()) p.matches += std::min(count, it->second);
    }
  }
  return p;
}

/// Corpus BLEU-n as a percentage: geometric mean of clipped 1..n-gram
/// precisions times the brevity penalty. Orders n >= 2 with no matches use
/// (matches + 1) / (total + 1).
inline double bleu(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references, std::size_t n) {
  detail::require_aligned(candidates, references, "BLEU");
  if (n == 0) throw ContractError("BLEU order must be >= 1");
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    cand_len += candidates[i].size();
    ref_len += references[i].size();
  }
  if (cand_len == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const auto p = clipped_precision(candidates, references, k);
    double precision = 0.0;
    if (p.matches > 0) {
      precision = static_cast<double>(p.matches) / static_cast<double>(p.total);
    } else if (k >= 2) {
      precision = 1.0 / static_cast<double>(p.total + 1);
    }
    if (precision == 0.0) return 0.0;
    log_sum += std::log(precision);
  }
  const double bp = cand_len > ref_len ? 1.0 : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return 100.0 * bp * std::exp(log_sum / static_cast<double>(n));
}

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// LCS F-measure of one pair, in [0, 1]. beta = 1 gives F1.
inline double rouge_l_pair(const Tokens& candidate, const Tokens& reference, double beta = 1.0) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

/// Mean per-pair ROUGE-L as a percentage.
inline double rouge_l(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references, double beta = 1.0) {
  detail::require_aligned(candidates, references, "ROUGE-L");
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += rouge_l_pair(candidates[i], references[i], beta);
  return 100.0 * total / static_cast<double>(candidates.size());
}

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

/// Exact-match unigram alignment: each candidate token, left to right,
/// takes the leftmost unused equal reference token.
inline MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference) {
  std::vector<bool> used(reference.size(), false);
  MeteorAlignment a;
  std::ptrdiff_t last_ref = -2;
  bool last_matched = false;
  for (const auto& tok : candidate) {
    std::ptrdiff_t hit = -1;
    for (std::size_t j = 0; j < reference.size(); ++j) {
      if (!used[j] && reference[j] == tok) {
        hit = static_cast<std::ptrdiff_t>(j);
        break;
      }
    }
    if (hit < 0) {
      last_matched = false;
      continue;
    }
    used[static_cast<std::size_t>(hit)] = true;
    ++a.matches;
    if (!(last_matched && hit == last_ref + 1)) ++a.chunks;
    last_ref = hit;
    last_matched = true;
  }
  return a;
}

/// One pair's METEOR-lite score in [0, 1].
inline double meteor_pair(const Tokens& candidate, const Tokens& reference, const MeteorParams& params = {}) {
  const auto a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double f_mean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return f_mean * (1.0 - penalty);
}

inline double meteor_lite(const std::vector<Tokens>& candidates, const std::vector<Tokens>& references,
                          const MeteorParams& params = {}) {
  detail::require_aligned(candidates, references, "METEOR");
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += meteor_pair(candidates[i], references[i], params);
  return 100.0 * total / static_cast<double>(candidates.size());
}

/// Unique n-grams over all n-grams across the candidates, as a percentage.
inline double distinct_n(const std::vector<Tokens>& candidates, std::size_t n) {
  if (candidates.empty()) throw ContractError("distinct-n of an empty corpus");
  std::set<NGram> unique;
  std::size_t total = 0;
  for (const auto& c : candidates) {
    for (const auto& [gram, count] : ngram_counts(c, n)) {
      unique.insert(gram);
      total += count;
    }
  }
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(unique.size()) / static_cast<double>(total);
}

}  // namespace misc::evalkit

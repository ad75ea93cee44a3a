#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "misc/corpus/tokenizer.hpp"
#include "misc/corpus/types.hpp"
#include "misc/error.hpp"

namespace misc::corpus {

/// Reserved ids. Fixed across every vocabulary.
inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kBos = 2;
inline constexpr int kEos = 3;
inline constexpr int kCls = 4;
inline constexpr int kNumReserved = 5;

inline constexpr std::array<std::string_view, kNumReserved> kReservedTokens = {"<pad>", "<unk>", "<s>", "</s>", "<cls>"};

class Vocabulary {
 public:
  Vocabulary() {
    for (auto t : kReservedTokens) push(std::string(t));
  }

  /// Rebuilds from a full token list whose first entries are the reserved tokens.
  static Vocabulary from_tokens(const std::vector<std::string>& tokens) {
    if (tokens.size() < kNumReserved) throw ContractError("vocabulary lacks reserved tokens");
    for (std::size_t i = 0; i < kNumReserved; ++i) {
      if (tokens[i] != kReservedTokens[i]) throw ContractError("vocabulary reserved token mismatch at " + std::to_string(i));
    }
    Vocabulary v;
    for (std::size_t i = kNumReserved; i < tokens.size(); ++i) {
      if (v.index_.count(tokens[i])) throw ContractError("duplicate vocabulary token: " + tokens[i]);
      v.push(tokens[i]);
    }
    return v;
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  int id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
  }
  bool contains(std::string_view token) const { return index_.count(std::string(token)) > 0; }

  const std::string& token(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) throw IndexError("token id " + std::to_string(id));
    return tokens_[static_cast<std::size_t>(id)];
  }

  std::vector<int> encode(std::string_view text) const {
    std::vector<int> ids;
    for (const auto& t : tokenize(text)) ids.push_back(id(t));
    return ids;
  }

  /// Drops PAD/BOS/EOS/CLS; UNK renders as "<unk>".
  std::string decode(const std::vector<int>& ids) const {
    std::vector<std::string> words;
    for (int i : ids) {
      if (i == kPad || i == kBos || i == kEos || i == kCls) continue;
      words.push_back(token(i));
    }
    return detokenize(words);
  }

 private:
  void push(std::string token) {
    index_.emplace(token, static_cast<int>(tokens_.size()));
    tokens_.push_back(std::move(token));
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Vocabulary over every token occurring at least `min_freq` times, ordered
/// by descending frequency then lexicographically.
template <typename TextRange>
Vocabulary build_vocab_from_texts(const TextRange& texts, std::size_t min_freq = 1) {
  if (min_freq < 1) throw ContractError("min_freq must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& text : texts)
    for (auto& t : tokenize(text)) ++counts[t];
  std::vector<std::pair<std::string, std::size_t>> entries;
  for (auto& [token, count] : counts) {
    if (count < min_freq) continue;
    if (std::find(kReservedTokens.begin(), kReservedTokens.end(), token) != kReservedTokens.end()) continue;
    entries.emplace_back(token, count);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens(kReservedTokens.begin(), kReservedTokens.end());
  for (auto& e : entries) tokens.push_back(e.first);
  return Vocabulary::from_tokens(tokens);
}

inline std::vector<std::string> example_texts(const std::vector<Example>& examples) {
  std::vector<std::string> texts;
  for (const auto& ex : examples) {
    texts.push_back(ex.situation);
    for (const auto& u : ex.context) texts.push_back(u.text);
    texts.push_back(ex.response);
  }
  return texts;
}

inline Vocabulary build_vocab(const std::vector<Example>& examples, std::size_t min_freq = 1) {
  return build_vocab_from_texts(example_texts(examples), min_freq);
}

}  // namespace misc::corpus

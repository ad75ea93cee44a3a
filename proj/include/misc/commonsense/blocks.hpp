#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "misc/commonsense/relation.hpp"
#include "misc/corpus/io.hpp"
#include "misc/corpus/tokenizer.hpp"
#include "misc/corpus/vocabulary.hpp"
#include "misc/error.hpp"
#include "misc/numerics/random.hpp"

namespace misc::commonsense {

enum class BlockSource { Situation, LastPost };

inline constexpr std::size_t kSituationBlockCap = 20;
inline constexpr std::size_t kLastPostBlockCap = 30;
inline constexpr std::size_t kMaxTailWords = 10;

inline const char* source_name(BlockSource s) { return s == BlockSource::Situation ? "situation" : "last_post"; }

/// One commonsense inference about the seeker.
struct MentalBlock {
  Relation relation = Relation::xReact;
  std::string tail;
  BlockSource source = BlockSource::Situation;

  friend bool operator==(const MentalBlock&, const MentalBlock&) = default;
};

/// Anything that yields inference tails for an (event, relation) pair.
class BlockProvider {
 public:
  virtual ~BlockProvider() = default;
  virtual std::vector<std::string> tails(std::string_view event, Relation relation) const = 0;
};

/// File-backed (event, relation) → tails table. Preserves first-insertion
/// order of keys and file order of tails.
class BlockCache : public BlockProvider {
 public:
  std::vector<std::string> tails(std::string_view event, Relation relation) const override {
    auto it = index_.find({std::string(event), relation});
    return it == index_.end() ? std::vector<std::string>{} : entries_[it->second].tails;
  }

  /// Appends tails; a repeated key extends the existing list.
  void add(std::string event, Relation relation, const std::vector<std::string>& tails) {
    auto key = std::make_pair(event, relation);
    auto it = index_.find(key);
    if (it == index_.end()) {
      index_.emplace(key, entries_.size());
      entries_.push_back({std::move(event), relation, tails});
    } else {
      auto& dst = entries_[it->second].tails;
      dst.insert(dst.end(), tails.begin(), tails.end());
    }
  }

  struct Entry {
    std::string event;
    Relation relation;
    std::vector<std::string> tails;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }

  friend bool operator==(const BlockCache& a, const BlockCache& b) { return a.entries_ == b.entries_; }

 private:
  std::vector<Entry> entries_;
  std::map<std::pair<std::string, Relation>, std::size_t> index_;
};

inline BlockCache parse_cache(const std::string& text) {
  BlockCache cache;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (corpus::normalize_whitespace(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError(line_no, "cache record must be an object");
    const std::string event = corpus::detail::require_string(j, "event", line_no);
    const std::string rel = corpus::detail::require_string(j, "relation", line_no);
    auto relation = parse_relation(rel);
    if (!relation) throw SchemaError(line_no, "unknown relation \"" + rel + "\"");
    const auto& tails = corpus::detail::require(j, "tails", line_no);
    if (!tails.is_array()) throw SchemaError(line_no, "\"tails\" must be an array");
    std::vector<std::string> values;
    for (const auto& t : tails) {
      if (!t.is_string()) throw SchemaError(line_no, "tails must be strings");
      values.push_back(t.get<std::string>());
    }
    cache.add(event, *relation, values);
  }
  return cache;
}

inline std::string serialize_cache(const BlockCache& cache) {
  std::string out;
  for (const auto& e : cache.entries()) {
    nlohmann::json j = {{"event", e.event}, {"relation", std::string(name(e.relation))}, {"tails", e.tails}};
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

inline BlockCache load_cache(const std::string& path) { return parse_cache(corpus::read_text_file(path)); }

inline void save_cache(const BlockCache& cache, const std::string& path) {
  corpus::write_text_file(path, serialize_cache(cache));
}

/// Deterministic stand-in generator: every (event, relation) yields
/// `tails_per_relation` tails of 2–6 tokens drawn from the vocabulary.
class SyntheticProvider : public BlockProvider {
 public:
  SyntheticProvider(std::uint64_t seed, const corpus::Vocabulary& vocabulary, std::size_t tails_per_relation = 3)
      : seed_(seed), tails_per_relation_(tails_per_relation) {
    for (std::size_t i = corpus::kNumReserved; i < vocabulary.size(); ++i) words_.push_back(vocabulary.tokens()[i]);
  }

  std::vector<std::string> tails(std::string_view event, Relation relation) const override {
    std::vector<std::string> out;
    if (words_.empty()) return out;
    numerics::Rng rng(numerics::mix_seed(seed_, numerics::stable_hash(event) + static_cast<std::uint64_t>(relation)));
    for (std::size_t t = 0; t < tails_per_relation_; ++t) {
      const std::size_t length = 2 + rng.below(5);
      std::vector<std::string> words;
      for (std::size_t w = 0; w < length; ++w) words.push_back(words_[rng.below(words_.size())]);
      out.push_back(corpus::detokenize(words));
    }
    return out;
  }

  /// Freezes the tails of the given events into a cache.
  BlockCache materialize(const std::vector<std::string>& events) const {
    BlockCache cache;
    for (const auto& event : events) {
      bool seen = false;
      for (const auto& e : cache.entries()) seen = seen || e.event == event;
      if (seen) continue;
      for (auto r : kAllRelations) cache.add(event, r, tails(event, r));
    }
    return cache;
  }

 private:
  std::uint64_t seed_;
  std::size_t tails_per_relation_;
  std::vector<std::string> words_;
};

inline SyntheticProvider synthetic_provider(std::uint64_t seed, const corpus::Vocabulary& vocabulary,
                                            std::size_t tails_per_relation = 3) {
  return SyntheticProvider(seed, vocabulary, tails_per_relation);
}

/// Tails within the word limit keep their original text; longer ones are cut
/// to their first `max_words` tokens.
inline std::string truncate_words(std::string_view text, std::size_t max_words = kMaxTailWords) {
  auto words = corpus::tokenize(text);
  if (words.size() <= max_words) return words.empty() ? std::string() : corpus::normalize_whitespace(text);
  words.resize(max_words);
  return corpus::detokenize(words);
}

inline std::size_t block_cap(BlockSource source) {
  return source == BlockSource::Situation ? kSituationBlockCap : kLastPostBlockCap;
}

/// Union of tails over all nine relations in fixed order, each truncated to
/// ten words, keeping only the first `cap` blocks (20 for a situation, 30 for
/// a last post).
inline std::vector<MentalBlock> query_blocks(const BlockProvider& provider, std::string_view event, BlockSource source,
                                             std::size_t cap) {
  std::vector<MentalBlock> blocks;
  for (auto r : kAllRelations) {
    for (const auto& tail : provider.tails(event, r)) {
      if (blocks.size() == cap) return blocks;
      std::string text = truncate_words(tail);
      if (text.empty()) continue;
      blocks.push_back({r, std::move(text), source});
    }
  }
  return blocks;
}

inline std::vector<MentalBlock> query_blocks(const BlockProvider& provider, std::string_view event, BlockSource source) {
  return query_blocks(provider, event, source, block_cap(source));
}

}  // namespace misc::commonsense

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "misc/corpus/types.hpp"
#include "misc/numerics/random.hpp"

namespace misc::corpus {

namespace detail {

inline constexpr std::array<const char*, 48> kSyntheticWords = {
    "i",     "feel",    "lost",    "work",   "friend", "school", "family", "tired",  "lonely", "worried", "job",
    "exam",  "sleep",   "money",   "today",  "week",   "always", "never",  "really", "hard",   "help",    "talk",
    "maybe", "try",     "sounds",  "tough",  "proud",  "walk",   "music",  "rest",   "plan",   "small",   "steps",
    "calm",  "breathe", "call",    "sister", "coach",  "garden", "rain",   "movie",  "book",   "write",   "list",
    "happy", "angry",   "nervous", "safe"};

inline std::string synthetic_sentence(numerics::Rng& rng, std::size_t min_words, std::size_t max_words) {
  const std::size_t n = min_words + rng.below(max_words - min_words + 1);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kSyntheticWords[rng.below(kSyntheticWords.size())];
  }
  return out;
}

}  // namespace detail

/// Deterministic toy dialogues: alternating seeker/supporter turns starting
/// with the seeker, `turns` utterances each. Supporter turn k of dialogue i
/// uses strategy (i + k) mod 8.
inline std::vector<Dialogue> synthetic_dialogues(std::size_t count, std::uint64_t seed, std::size_t turns = 2) {
  numerics::Rng rng(seed);
  std::vector<Dialogue> out;
  for (std::size_t i = 0; i < count; ++i) {
    Dialogue d;
    d.situation = detail::synthetic_sentence(rng, 4, 6);
    d.emotion_type = "sadness";
    std::size_t supporter_turn = 0;
    for (std::size_t t = 0; t < turns; ++t) {
      Utterance u;
      if (t % 2 == 0) {
        u.speaker = Speaker::Seeker;
        u.text = detail::synthetic_sentence(rng, 4, 7);
      } else {
        u.speaker = Speaker::Supporter;
        u.text = detail::synthetic_sentence(rng, 3, 6);
        u.strategy = static_cast<StrategyId>((i + supporter_turn++) % strategy::kNumStrategies);
      }
      d.utterances.push_back(std::move(u));
    }
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace misc::corpus

#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace misc::strategy {

/// The eight support strategies, with stable codes 0..7.
enum class StrategyId : int {
  Question = 0,
  RestatementOrParaphrasing = 1,
  ReflectionOfFeelings = 2,
  SelfDisclosure = 3,
  AffirmationAndReassurance = 4,
  ProvidingSuggestions = 5,
  Information = 6,
  Others = 7,
};

inline constexpr std::size_t kNumStrategies = 8;

inline constexpr std::array<std::string_view, kNumStrategies> kStrategyNames = {
    "Question",
    "Restatement or Paraphrasing",
    "Reflection of Feelings",
    "Self-disclosure",
    "Affirmation and Reassurance",
    "Providing Suggestions",
    "Information",
    "Others",
};

inline constexpr std::array<std::string_view, kNumStrategies> kStrategyDescriptions = {
    "Asking for information related to the problem to help the help-seeker articulate the issues that they face.",
    "A simple, more concise rephrasing of the help-seeker's statements that could help them see their situation more clearly.",
    "Articulate and describe the help-seeker's feelings.",
    "Divulge similar experiences that you have had or emotions that you share with the help-seeker to express your empathy.",
    "Affirm the help-seeker's strengths, motivation, and capabilities and provide reassurance and encouragement.",
    "Provide suggestions about how to change, but be careful to not overstep and tell them what to do.",
    "Provide useful information to the help-seeker, for example with data, facts, opinions, resources, or by answering questions.",
    "Exchange pleasantries and use other support strategies that do not fall into the above categories.",
};

constexpr int code(StrategyId id) { return static_cast<int>(id); }

constexpr std::string_view name(StrategyId id) { return kStrategyNames[static_cast<std::size_t>(id)]; }

inline std::optional<StrategyId> from_code(int value) {
  if (value < 0 || value >= static_cast<int>(kNumStrategies)) return std::nullopt;
  return static_cast<StrategyId>(value);
}

/// Exact, case-sensitive match against the canonical names.
inline std::optional<StrategyId> parse_strategy(std::string_view text) {
  for (std::size_t i = 0; i < kNumStrategies; ++i)
    if (kStrategyNames[i] == text) return static_cast<StrategyId>(i);
  return std::nullopt;
}

}  // namespace misc::strategy

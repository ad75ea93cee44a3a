#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace misc::commonsense {

/// The nine ATOMIC relations, in the fixed order used for block unions.
enum class Relation : int { oEffect, oReact, oWant, xAttr, xEffect, xIntent, xNeed, xReact, xWant };

inline constexpr std::size_t kNumRelations = 9;

inline constexpr std::array<Relation, kNumRelations> kAllRelations = {
    Relation::oEffect, Relation::oReact,  Relation::oWant,  Relation::xAttr, Relation::xEffect,
    Relation::xIntent, Relation::xNeed,   Relation::xReact, Relation::xWant,
};

inline constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "oEffect", "oReact", "oWant", "xAttr", "xEffect", "xIntent", "xNeed", "xReact", "xWant",
};

inline constexpr std::array<std::string_view, kNumRelations> kRelationDescriptions = {
    "The effect the event has on others besides Person X.",
    "The reaction of others besides Person X to the event.",
    "What others besides Person X may want to do after the event.",
    "How Person X might be described given their part in the event.",
    "The effect that the event would have on Person X.",
    "The reason why X would cause the event.",
    "What Person X might need to do before the event.",
    "The reaction that Person X would have to the event.",
    "What Person X may want to do after the event.",
};

constexpr std::string_view name(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }
constexpr std::string_view description(Relation r) { return kRelationDescriptions[static_cast<std::size_t>(r)]; }

inline std::optional<Relation> parse_relation(std::string_view text) {
  for (std::size_t i = 0; i < kNumRelations; ++i)
    if (kRelationNames[i] == text) return kAllRelations[i];
  return std::nullopt;
}

}  // namespace misc::commonsense

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "misc/strategy/strategy_id.hpp"

namespace misc::corpus {

using strategy::StrategyId;

enum class Speaker { Seeker, Supporter };

struct Utterance {
  Speaker speaker = Speaker::Seeker;
  std::string text;
  std::optional<StrategyId> strategy;  // present iff speaker is the supporter

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Dialogue {
  std::string situation;
  std::string emotion_type;  // carried through, unused by the model
  std::vector<Utterance> utterances;

  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

/// One training instance: respond to `context` with `response` using
/// strategy `strategy_label`.
struct Example {
  std::string id;
  std::size_t dialogue_index = 0;
  std::size_t turn_index = 0;       // position of the response in its dialogue
  std::size_t dialogue_length = 0;  // utterances in the source dialogue
  std::string situation;
  std::vector<Utterance> context;
  std::string last_post;
  std::string response;
  StrategyId strategy_label = StrategyId::Question;

  /// Relative conversation progress of the response, in [0, 1).
  double progress() const {
    return dialogue_length == 0 ? 0.0 : static_cast<double>(turn_index) / static_cast<double>(dialogue_length);
  }

  friend bool operator==(const Example&, const Example&) = default;
};

inline const char* speaker_name(Speaker s) { return s == Speaker::Seeker ? "seeker" : "supporter"; }

}  // namespace misc::corpus

#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "misc/corpus/tokenizer.hpp"
#include "misc/corpus/types.hpp"
#include "misc/error.hpp"

namespace misc::corpus {

using nlohmann::json;

struct LineError {
  std::size_t line = 0;
  std::string message;
};

struct CorpusLoad {
  std::vector<Dialogue> dialogues;
  std::vector<LineError> errors;

  /// Throws the first collected error as a SchemaError.
  void throw_if_errors() const {
    if (!errors.empty()) throw SchemaError(errors.front().line, errors.front().message);
  }
};

namespace detail {

inline const json& require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(line, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::string require_string(const json& obj, const char* key, std::size_t line) {
  const json& v = require(obj, key, line);
  if (!v.is_string()) throw SchemaError(line, std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

}  // namespace detail

inline Utterance parse_utterance(const json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "utterance must be an object");
  Utterance u;
  const std::string speaker = detail::require_string(j, "speaker", line);
  if (speaker == "seeker") {
    u.speaker = Speaker::Seeker;
  } else if (speaker == "supporter") {
    u.speaker = Speaker::Supporter;
  } else {
    throw SchemaError(line, "unknown speaker \"" + speaker + "\"");
  }
  u.text = normalize_whitespace(detail::require_string(j, "text", line));
  if (u.text.empty()) throw SchemaError(line, "empty utterance text");
  auto it = j.find("strategy");
  const bool has_strategy = it != j.end() && !it->is_null();
  if (u.speaker == Speaker::Supporter) {
    if (!has_strategy) throw SchemaError(line, "supporter utterance without strategy");
    if (!it->is_string()) throw SchemaError(line, "strategy must be a string");
    auto id = strategy::parse_strategy(it->get<std::string>());
    if (!id) throw SchemaError(line, "invalid strategy \"" + it->get<std::string>() + "\"");
    u.strategy = *id;
  }
  return u;
}

inline json to_json(const Utterance& u) {
  json j = {{"speaker", speaker_name(u.speaker)}, {"text", u.text}};
  if (u.strategy) j["strategy"] = std::string(strategy::name(*u.strategy));
  return j;
}

inline Dialogue parse_dialogue(const json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "record must be a JSON object");
  Dialogue d;
  d.situation = normalize_whitespace(detail::require_string(j, "situation", line));
  d.emotion_type = detail::require_string(j, "emotion_type", line);
  const json& turns = detail::require(j, "dialog", line);
  if (!turns.is_array()) throw SchemaError(line, "\"dialog\" must be an array");
  for (const auto& t : turns) d.utterances.push_back(parse_utterance(t, line));
  return d;
}

inline json to_json(const Dialogue& d) {
  json turns = json::array();
  for (const auto& u : d.utterances) turns.push_back(to_json(u));
  return {{"situation", d.situation}, {"emotion_type", d.emotion_type}, {"dialog", std::move(turns)}};
}

/// Reads one dialogue per non-blank line. Malformed lines are collected in
/// CorpusLoad::errors with their 1-based line numbers; I/O failure throws.
inline CorpusLoad load_corpus(const std::string& path) {
  CorpusLoad result;
  const auto lines = detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (normalize_whitespace(lines[i]).empty()) continue;
    try {
      json j;
      try {
        j = json::parse(lines[i]);
      } catch (const json::parse_error& e) {
        throw SchemaError(line_no, std::string("invalid JSON: ") + e.what());
      }
      result.dialogues.push_back(parse_dialogue(j, line_no));
    } catch (const SchemaError& e) {
      result.errors.push_back({line_no, e.what()});
    }
  }
  return result;
}

inline json to_json(const Example& ex) {
  json ctx = json::array();
  for (const auto& u : ex.context) ctx.push_back(to_json(u));
  return {{"id", ex.id},
          {"dialogue", ex.dialogue_index},
          {"turn", ex.turn_index},
          {"dialogue_length", ex.dialogue_length},
          {"situation", ex.situation},
          {"context", std::move(ctx)},
          {"last_post", ex.last_post},
          {"response", ex.response},
          {"strategy", std::string(strategy::name(ex.strategy_label))}};
}

inline Example parse_example(const json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "example must be an object");
  Example ex;
  ex.id = detail::require_string(j, "id", line);
  ex.dialogue_index = detail::require(j, "dialogue", line).get<std::size_t>();
  ex.turn_index = detail::require(j, "turn", line).get<std::size_t>();
  ex.dialogue_length = detail::require(j, "dialogue_length", line).get<std::size_t>();
  ex.situation = detail::require_string(j, "situation", line);
  for (const auto& u : detail::require(j, "context", line)) ex.context.push_back(parse_utterance(u, line));
  ex.last_post = detail::require_string(j, "last_post", line);
  ex.response = detail::require_string(j, "response", line);
  const std::string label = detail::require_string(j, "strategy", line);
  auto id = strategy::parse_strategy(label);
  if (!id) throw SchemaError(line, "invalid strategy \"" + label + "\"");
  ex.strategy_label = *id;
  return ex;
}

inline std::string examples_to_jsonl(const std::vector<Example>& examples) {
  std::string out;
  for (const auto& ex : examples) {
    out += to_json(ex).dump();
    out.push_back('\n');
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_examples(const std::string& path, const std::vector<Example>& examples) {
  write_text_file(path, examples_to_jsonl(examples));
}

/// Strict reader for split files; the first malformed line throws.
inline std::vector<Example> read_examples(const std::string& path) {
  std::vector<Example> out;
  const auto lines = detail::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (normalize_whitespace(lines[i]).empty()) continue;
    try {
      out.push_back(parse_example(json::parse(lines[i]), i + 1));
    } catch (const json::exception& e) {
      throw SchemaError(i + 1, e.what());
    }
  }
  return out;
}

}  // namespace misc::corpus

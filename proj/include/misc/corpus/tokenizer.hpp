#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace misc::corpus {

namespace detail {

inline bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '\'' || c >= 0x80; }

inline bool attaches_left(std::string_view token) {
  return token.size() == 1 && std::string_view(".,!?;:").find(token[0]) != std::string_view::npos;
}

}  // namespace detail

/// Lowercased word tokens; every other punctuation character is its own
/// token. Apostrophes stay inside words ("i'm").
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string word;
  auto flush = [&] {
    if (!word.empty()) tokens.push_back(std::move(word));
    word.clear();
  };
  for (unsigned char c : text) {
    if (detail::is_word_byte(c)) {
      word.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
    } else if (std::isspace(c) || std::iscntrl(c)) {
      flush();
    } else {
      flush();
      tokens.emplace_back(1, static_cast<char>(c));
    }
  }
  flush();
  return tokens;
}

/// Inverse of tokenize() on canonical text: tokens joined by single spaces,
/// with `. , ! ? ; :` attached to the preceding token.
inline std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && !detail::attaches_left(t)) out.push_back(' ');
    out += t;
  }
  return out;
}

/// Collapses whitespace runs and trims; used to validate non-empty text.
inline std::string normalize_whitespace(std::string_view text) {
  std::string out;
  bool pending = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(static_cast<char>(c));
  }
  return out;
}

}  // namespace misc::corpus

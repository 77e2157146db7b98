#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace geodragon::tokens {

// End-of-sequence marker used by the decoder; reserved, never a word token.
inline constexpr const char* kEos = "</s>";

// Word-level tokens: maximal runs of non-space, non-hyphen characters, plus
// explicit "-" tokens. Runs of whitespace collapse; spaces adjacent to a
// hyphen are dropped, so detokenize(tokenize(s)) is canonical.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == '-' || c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
      if (c == '-') out.emplace_back("-");
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Joins word tokens with single spaces; hyphen tokens bind without spaces.
inline std::string detokenize(std::span<const std::string> toks) {
  std::string out;
  bool prev_word = false;
  for (const std::string& t : toks) {
    if (t == "-") {
      out += '-';
      prev_word = false;
    } else {
      if (prev_word) out += ' ';
      out += t;
      prev_word = true;
    }
  }
  return out;
}

// Canonical spelling: the fixed point of tokenize/detokenize.
inline std::string canonicalize(std::string_view text) {
  const auto toks = tokenize(text);
  return detokenize(toks);
}

}  // namespace geodragon::tokens

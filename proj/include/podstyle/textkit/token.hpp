#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "podstyle/common.hpp"

namespace podstyle {

// Universal coarse part-of-speech tags.
enum class PosTag : unsigned char {
  ADJ, ADP, ADV, AUX, CCONJ, DET, INTJ, NOUN, NUM,
  PART, PRON, PROPN, PUNCT, SCONJ, SYM, VERB, X
};

inline constexpr std::size_t kNumPosTags = 17;

inline constexpr std::array<std::string_view, kNumPosTags> kPosTagNames = {
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};

inline std::string_view to_string(PosTag t) { return kPosTagNames[static_cast<std::size_t>(t)]; }

inline std::optional<PosTag> parse_pos_tag(std::string_view s) {
  for (std::size_t i = 0; i < kNumPosTags; ++i) {
    if (kPosTagNames[i] == s) return static_cast<PosTag>(i);
  }
  return std::nullopt;
}

inline std::size_t index_of(PosTag t) { return static_cast<std::size_t>(t); }

struct Token {
  std::string surface;
  std::string norm;
  std::optional<PosTag> pos;
  bool space_after = true;
};

using Sentence = std::vector<Token>;

}  // namespace podstyle

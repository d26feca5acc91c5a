#pragma once

#include <algorithm>
#include <cctype>
#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "podstyle/textkit/normalize.hpp"
#include "podstyle/textkit/token.hpp"
#include "podstyle/textkit/utf8.hpp"

namespace podstyle {

namespace detail {

inline constexpr std::array<std::string_view, 40> kAbbreviations = {
    "mr", "mrs", "ms", "dr", "prof", "st", "jr", "sr", "vs", "etc",
    "inc", "ltd", "co", "corp", "mt", "no", "vol", "ft", "approx", "dept",
    "est", "fig", "gen", "gov", "rev", "sgt", "capt", "col", "lt", "e.g",
    "i.e", "jan", "feb", "mar", "apr", "aug", "sep", "sept", "oct", "nov"};

inline bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

inline bool is_closing(std::string_view tok) {
  return tok == "\"" || tok == "'" || tok == ")" || tok == "]" || tok == "}" ||
         tok == "’" || tok == "”";
}

inline bool is_opening(std::string_view tok) {
  return tok == "\"" || tok == "'" || tok == "(" || tok == "[" || tok == "‘" ||
         tok == "“";
}

inline bool is_terminator(std::string_view tok) {
  return !tok.empty() &&
         std::all_of(tok.begin(), tok.end(), [](char c) { return c == '.' || c == '!' || c == '?'; });
}

inline bool starts_upper(std::string_view tok) {
  if (tok.empty()) return false;
  std::size_t i = 0;
  return utf8::is_upper(utf8::next(tok, i));
}

inline Token make_token(std::string_view surface, bool placeholder_kind_url, bool is_special) {
  Token t;
  t.surface = std::string(surface);
  if (is_special) {
    t.norm = std::string(placeholder_kind_url ? kUrlToken : kHandleToken);
  } else {
    fold_keep_placeholders(surface, t.norm);
  }
  return t;
}

// Splits a run of non-URL text into word and punctuation tokens.
inline void split_plain(std::string_view s, std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < s.size()) {
    const std::string_view rest = s.substr(i);
    if (rest.starts_with(kUrlToken) || rest.starts_with(kHandleToken)) {
      const auto len = rest.starts_with(kUrlToken) ? kUrlToken.size() : kHandleToken.size();
      out.push_back(make_token(rest.substr(0, len), false, false));
      out.back().space_after = false;
      i += len;
      continue;
    }
    std::size_t j = i;
    const char32_t cp = utf8::next(s, j);
    if (utf8::is_alnum(cp)) {
      char32_t prev = cp;
      while (j < s.size()) {
        std::size_t k = j;
        const char32_t c = utf8::next(s, k);
        if (utf8::is_alnum(c)) {
          prev = c;
          j = k;
          continue;
        }
        // Word-internal joiners: don't, well-known, 3.5, 1,000
        if (k < s.size()) {
          std::size_t m = k;
          const char32_t after = utf8::next(s, m);
          const bool joins =
              (is_apostrophe(c) && utf8::is_letter(prev) && utf8::is_letter(after)) ||
              (c == '-' && utf8::is_alnum(prev) && utf8::is_alnum(after)) ||
              ((c == '.' || c == ',') && utf8::is_digit(prev) && utf8::is_digit(after));
          if (joins) {
            prev = after;
            j = m;
            continue;
          }
        }
        break;
      }
    } else {
      // Runs of the same punctuation mark ("...", "!!") stay together.
      while (j < s.size()) {
        std::size_t k = j;
        if (utf8::next(s, k) != cp) break;
        j = k;
      }
    }
    out.push_back(make_token(s.substr(i, j - i), false, false));
    out.back().space_after = false;
    i = j;
  }
}

}  // namespace detail

// Splits text into tokens: URLs/handles whole, words (with internal
// apostrophes, hyphens, and numeric separators), and punctuation marks.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t j = i;
    while (j < text.size()) {
      std::size_t k = j;
      if (utf8::is_space(utf8::next(text, k))) break;
      j = k;
    }
    if (j > i) {
      const ChunkParts parts = split_chunk(text.substr(i, j - i));
      if (parts.kind == ChunkParts::Kind::none) {
        detail::split_plain(parts.body, out);
      } else {
        detail::split_plain(parts.lead, out);
        out.push_back(detail::make_token(parts.body, parts.kind == ChunkParts::Kind::url, true));
        out.back().space_after = false;
        detail::split_plain(parts.tail, out);
      }
      i = j;
    }
    bool had_space = false;
    while (i < text.size()) {
      std::size_t k = i;
      if (!utf8::is_space(utf8::next(text, k))) break;
      i = k;
      had_space = true;
    }
    if (had_space && !out.empty()) out.back().space_after = true;
  }
  if (!out.empty()) out.back().space_after = true;
  return out;
}

// Sentence boundaries fall after '.', '!' or '?' (plus any closing quotes or
// brackets) when followed by whitespace and a capitalised token, or by the
// end of the text. A '.' after a known abbreviation or a single-letter
// initial does not end a sentence ("no." only before a numeral).
inline std::vector<Sentence> tokenize_sentences(std::string_view text) {
  std::vector<Token> tokens = tokenize(text);
  std::vector<Sentence> sentences;
  Sentence current;
  const auto is_abbrev_dot = [&](std::size_t idx) {
    if (tokens[idx].surface != "." || idx == 0) return false;
    const Token& prev = tokens[idx - 1];
    if (prev.space_after) return false;
    // "no." abbreviates "number" only before a numeral.
    if (prev.norm == "no") {
      return idx + 1 < tokens.size() && !tokens[idx + 1].surface.empty() &&
             std::isdigit(static_cast<unsigned char>(tokens[idx + 1].surface[0]));
    }
    if (std::find(detail::kAbbreviations.begin(), detail::kAbbreviations.end(), prev.norm) !=
        detail::kAbbreviations.end()) {
      return true;
    }
    std::size_t k = 0;
    const char32_t first = utf8::next(prev.surface, k);
    return k == prev.surface.size() && utf8::is_upper(first);
  };
  std::size_t idx = 0;
  while (idx < tokens.size()) {
    current.push_back(tokens[idx]);
    if (detail::is_terminator(tokens[idx].surface) && !is_abbrev_dot(idx)) {
      std::size_t last = idx;
      while (!tokens[last].space_after && last + 1 < tokens.size() &&
             detail::is_closing(tokens[last + 1].surface)) {
        ++last;
        current.push_back(tokens[last]);
      }
      bool boundary = false;
      if (last + 1 >= tokens.size()) {
        boundary = true;
      } else if (tokens[last].space_after) {
        const Token& next = tokens[last + 1];
        if (detail::starts_upper(next.surface)) {
          boundary = true;
        } else if (detail::is_opening(next.surface) && last + 2 < tokens.size() &&
                   detail::starts_upper(tokens[last + 2].surface)) {
          boundary = true;
        }
      }
      idx = last + 1;
      if (boundary) {
        sentences.push_back(std::move(current));
        current.clear();
      }
      continue;
    }
    ++idx;
  }
  if (!current.empty()) sentences.push_back(std::move(current));
  return sentences;
}

// True for tokens that count as words: anything with a letter or digit, and
// the URL/handle placeholders.
inline bool is_word_token(const Token& t) {
  if (t.norm == kUrlToken || t.norm == kHandleToken) return true;
  for (std::size_t i = 0; i < t.surface.size();) {
    if (utf8::is_alnum(utf8::next(t.surface, i))) return true;
  }
  return false;
}

inline std::vector<Token> flatten(const std::vector<Sentence>& sentences) {
  std::vector<Token> out;
  for (const auto& s : sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

}  // namespace podstyle

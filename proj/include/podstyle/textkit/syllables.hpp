#pragma once

#include <string>
#include <string_view>

namespace podstyle {

// Vowel-group syllable heuristic for English words.
//
// Counts maximal runs of vowels (y is a vowel except word-initially), then
// drops a silent final 'e' ("cake") unless the word ends in consonant+"le"
// ("table") or "ee" ("agree"), and drops the 'e' of a final "-ed"/"-es"
// that is not pronounced ("jumped", "makes"). Non-letters are ignored;
// the result is at least 1.
inline int count_syllables(std::string_view word) {
  std::string w;
  w.reserve(word.size());
  for (char c : word) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c >= 'a' && c <= 'z') w.push_back(c);
  }
  if (w.empty()) return 1;

  const auto is_vowel = [&](std::size_t i) {
    const char c = w[i];
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
    return c == 'y' && i > 0;
  };

  int groups = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel(i) && (i == 0 || !is_vowel(i - 1))) ++groups;
  }

  const std::size_t n = w.size();
  const auto consonant_at = [&](std::size_t i) { return !is_vowel(i); };
  if (n >= 3 && w[n - 1] == 'e' && consonant_at(n - 2)) {
    const bool consonant_le = w[n - 2] == 'l' && consonant_at(n - 3);
    if (!consonant_le) --groups;
  } else if (n >= 4 && w[n - 1] == 'd' && w[n - 2] == 'e' && consonant_at(n - 3)) {
    const char c = w[n - 3];
    if (c != 't' && c != 'd') --groups;
  } else if (n >= 4 && w[n - 1] == 's' && w[n - 2] == 'e' && consonant_at(n - 3)) {
    const char c = w[n - 3];
    const bool sibilant = c == 's' || c == 'x' || c == 'z' ||
                          (c == 'h' && (w[n - 4] == 'c' || w[n - 4] == 's')) ||
                          c == 'c' || c == 'g';
    const bool consonant_les = c == 'l' && n >= 5 && consonant_at(n - 4);
    if (!sibilant && !consonant_les) --groups;
  }
  return groups < 1 ? 1 : groups;
}

}  // namespace podstyle

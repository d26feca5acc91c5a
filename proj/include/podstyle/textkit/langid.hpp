#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/textkit/utf8.hpp"

namespace podstyle {

// Ranked character-trigram profile (most frequent first).
struct LanguageProfile {
  std::string language;
  std::vector<std::string> ranked;
};

using LanguageProfiles = std::vector<LanguageProfile>;

struct LanguageGuess {
  std::string language;
  double confidence = 0.0;
};

inline constexpr std::size_t kProfileSize = 300;
inline constexpr std::size_t kMinAlphaChars = 20;

namespace langid_detail {

// Trigram counts over case-folded letter runs padded with '_' on both sides.
inline std::map<std::string, std::size_t> trigram_counts(std::string_view text,
                                                         std::size_t* alpha_chars = nullptr) {
  std::map<std::string, std::size_t> counts;
  std::vector<char32_t> word;
  std::size_t alpha = 0;
  const auto flush = [&] {
    if (word.empty()) return;
    std::vector<char32_t> padded;
    padded.reserve(word.size() + 2);
    padded.push_back('_');
    padded.insert(padded.end(), word.begin(), word.end());
    padded.push_back('_');
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      std::string g;
      for (std::size_t k = 0; k < 3; ++k) utf8::append(g, padded[i + k]);
      ++counts[g];
    }
    word.clear();
  };
  for (std::size_t i = 0; i < text.size();) {
    const char32_t c = utf8::next(text, i);
    if (utf8::is_letter(c)) {
      word.push_back(utf8::fold(c));
      ++alpha;
    } else {
      flush();
    }
  }
  flush();
  if (alpha_chars) *alpha_chars = alpha;
  return counts;
}

inline std::vector<std::string> rank(const std::map<std::string, std::size_t>& counts,
                                     std::size_t limit) {
  std::vector<std::pair<std::string, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size() && i < limit; ++i) out.push_back(v[i].first);
  return out;
}

}  // namespace langid_detail

inline LanguageProfile build_language_profile(std::string language, std::string_view sample,
                                              std::size_t size = kProfileSize) {
  return {std::move(language), langid_detail::rank(langid_detail::trigram_counts(sample), size)};
}

// Out-of-place distance between a document's ranked trigrams and a profile;
// trigrams missing from the profile cost the profile length.
inline std::size_t out_of_place(const std::vector<std::string>& doc, const LanguageProfile& profile) {
  std::unordered_map<std::string_view, std::size_t> pos;
  for (std::size_t i = 0; i < profile.ranked.size(); ++i) pos.emplace(profile.ranked[i], i);
  std::size_t d = 0;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto it = pos.find(doc[i]);
    if (it == pos.end()) {
      d += profile.ranked.size();
    } else {
      d += it->second > i ? it->second - i : i - it->second;
    }
  }
  return d;
}

// Returns the closest profile's language. Confidence is the runner-up margin
// (d2 - d1) / d2; with a single profile it is 1. Texts with fewer than 20
// letters return ("und", 0).
inline LanguageGuess detect_language(std::string_view text, const LanguageProfiles& profiles) {
  if (profiles.empty()) throw ConfigError("detect_language: no language profiles");
  std::size_t alpha = 0;
  const auto counts = langid_detail::trigram_counts(text, &alpha);
  if (alpha < kMinAlphaChars) return {"und", 0.0};
  const auto doc = langid_detail::rank(counts, kProfileSize);
  std::vector<std::pair<std::size_t, std::size_t>> dist;  // (distance, profile index)
  for (std::size_t i = 0; i < profiles.size(); ++i) dist.emplace_back(out_of_place(doc, profiles[i]), i);
  std::sort(dist.begin(), dist.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return profiles[a.second].language < profiles[b.second].language;
  });
  LanguageGuess g{profiles[dist[0].second].language, 1.0};
  if (dist.size() > 1) {
    const double d1 = static_cast<double>(dist[0].first);
    const double d2 = static_cast<double>(dist[1].first);
    g.confidence = d2 > 0.0 ? (d2 - d1) / d2 : 0.0;
  }
  return g;
}

// Profile file: a "# lang=<code>" comment, then one trigram per line by rank.
// Other lines starting with '#' are comments.
inline void write_language_profile(const LanguageProfile& p, std::ostream& out) {
  out << "# lang=" << p.language << "\n";
  for (const auto& g : p.ranked) out << g << "\n";
}

inline LanguageProfile read_language_profile(std::istream& in) {
  LanguageProfile p;
  bool has_lang = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with("# lang=")) {
        p.language = std::string(trim(std::string_view(line).substr(7)));
        has_lang = true;
      }
      continue;
    }
    p.ranked.push_back(line);
  }
  if (!has_lang) throw DataError("language profile: missing '# lang=' header");
  if (p.ranked.empty()) throw DataError("language profile '" + p.language + "' is empty");
  return p;
}

inline LanguageProfile load_language_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open language profile: " + path);
  return read_language_profile(in);
}

}  // namespace podstyle

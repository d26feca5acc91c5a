#pragma once

// Episode records, the newline-delimited interchange format, corpus filters
// and transcript truncation.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "podstyle/common.hpp"

namespace podstyle {

struct TranscriptWord {
  std::string token;
  double start_s = 0.0;
  double end_s = 0.0;

  bool operator==(const TranscriptWord&) const = default;
};

struct Episode {
  std::string show_id;
  std::string episode_id;
  std::string show_title;
  std::string show_description;
  std::string episode_title;
  std::string episode_description;
  std::vector<TranscriptWord> words;
  double duration_s = 0.0;
  std::uint64_t first_streams = 0;
  std::uint64_t qualified_streams = 0;
  std::optional<std::string> published;
  std::optional<std::string> language_hint;

  // show_description + episode_description, the text treated as "the
  // description" by every description-side feature.
  std::string description() const {
    if (show_description.empty()) return episode_description;
    if (episode_description.empty()) return show_description;
    return show_description + " " + episode_description;
  }

  bool operator==(const Episode&) const = default;
};

struct Corpus {
  std::vector<Episode> episodes;
  bool filtered = false;
};

struct FilterConfig {
  double min_duration_s = 600.0;
  // The source study's stream threshold is unpublished; 10 is a placeholder.
  std::uint64_t min_streams = 10;
  double truncate_s = 600.0;
  std::string language = "en";
};

// Slack allowed between the last aligned word and the stated duration.
inline constexpr double kAlignmentJitterS = 1.0;

// Throws DataError naming the episode when a type invariant fails.
inline void validate_episode(const Episode& e) {
  const auto fail = [&](const std::string& why) {
    throw DataError("episode '" + e.episode_id + "': " + why);
  };
  if (e.episode_id.empty()) throw DataError("episode with empty episode_id");
  if (e.show_id.empty()) fail("empty show_id");
  if (!(e.duration_s > 0.0)) fail("duration_s must be > 0");
  if (e.qualified_streams > e.first_streams) fail("qualified_streams exceeds first_streams");
  double prev_start = 0.0;
  for (std::size_t i = 0; i < e.words.size(); ++i) {
    const auto& w = e.words[i];
    if (!(w.start_s >= 0.0) || !(w.end_s >= w.start_s)) {
      fail("word " + std::to_string(i) + " has invalid alignment");
    }
    if (w.start_s < prev_start) fail("words not sorted by start time at index " + std::to_string(i));
    if (w.end_s > e.duration_s + kAlignmentJitterS) {
      fail("word " + std::to_string(i) + " ends after the episode duration");
    }
    prev_start = w.start_s;
  }
}

// ---------------------------------------------------------------------------
// Interchange format

namespace corpus_detail {

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::size_t lineno) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    throw DataError("line " + std::to_string(lineno) + ": missing field '" + key + "'");
  }
  return *it;
}

inline std::string get_string(const nlohmann::json& obj, const char* key, std::size_t lineno) {
  const auto& v = require(obj, key, lineno);
  if (!v.is_string()) {
    throw DataError("line " + std::to_string(lineno) + ": field '" + key + "' must be a string");
  }
  return v.get<std::string>();
}

inline double get_number(const nlohmann::json& v, const std::string& key, std::size_t lineno) {
  if (!v.is_number()) {
    throw DataError("line " + std::to_string(lineno) + ": field '" + key + "' must be a number");
  }
  return v.get<double>();
}

inline std::uint64_t get_count(const nlohmann::json& obj, const char* key, std::size_t lineno) {
  const auto& v = require(obj, key, lineno);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<long long>() >= 0) return static_cast<std::uint64_t>(v.get<long long>());
  throw DataError("line " + std::to_string(lineno) + ": field '" + key +
                  "' must be a nonnegative integer");
}

inline std::optional<std::string> get_optional_string(const nlohmann::json& obj, const char* key,
                                                      std::size_t lineno) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw DataError("line " + std::to_string(lineno) + ": field '" + key + "' must be a string");
  }
  return it->get<std::string>();
}

inline bool plausible_iso8601(std::string_view s) {
  if (s.size() < 10) return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u}) {
    if (s[i] < '0' || s[i] > '9') return false;
  }
  return s[4] == '-' && s[7] == '-';
}

}  // namespace corpus_detail

// Parses one interchange record; `lineno` is used in error messages.
inline Episode parse_episode(std::string_view line, std::size_t lineno) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("line " + std::to_string(lineno) + ": invalid JSON (" + e.what() + ")");
  }
  if (!obj.is_object()) throw DataError("line " + std::to_string(lineno) + ": record must be an object");
  using namespace corpus_detail;
  Episode e;
  e.show_id = get_string(obj, "show_id", lineno);
  e.episode_id = get_string(obj, "episode_id", lineno);
  e.show_title = get_string(obj, "show_title", lineno);
  e.show_description = get_string(obj, "show_description", lineno);
  e.episode_title = get_string(obj, "episode_title", lineno);
  e.episode_description = get_string(obj, "episode_description", lineno);
  e.duration_s = get_number(require(obj, "duration_s", lineno), "duration_s", lineno);
  e.first_streams = get_count(obj, "first_streams", lineno);
  e.qualified_streams = get_count(obj, "qualified_streams", lineno);
  e.published = get_optional_string(obj, "published", lineno);
  if (e.published && !plausible_iso8601(*e.published)) {
    throw DataError("line " + std::to_string(lineno) + ": field 'published' is not ISO-8601");
  }
  e.language_hint = get_optional_string(obj, "language_hint", lineno);
  const auto& words = require(obj, "words", lineno);
  if (!words.is_array()) throw DataError("line " + std::to_string(lineno) + ": field 'words' must be an array");
  e.words.reserve(words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto& w = words[i];
    const std::string where = "words[" + std::to_string(i) + "]";
    if (!w.is_object()) throw DataError("line " + std::to_string(lineno) + ": field '" + where + "' must be an object");
    const auto t = w.find("t");
    if (t == w.end() || !t->is_string()) {
      throw DataError("line " + std::to_string(lineno) + ": field '" + where + ".t' must be a string");
    }
    const auto s = w.find("s");
    const auto en = w.find("e");
    if (s == w.end()) throw DataError("line " + std::to_string(lineno) + ": missing field '" + where + ".s'");
    if (en == w.end()) throw DataError("line " + std::to_string(lineno) + ": missing field '" + where + ".e'");
    e.words.push_back({t->get<std::string>(), get_number(*s, where + ".s", lineno),
                       get_number(*en, where + ".e", lineno)});
  }
  validate_episode(e);
  return e;
}

inline nlohmann::ordered_json episode_to_json(const Episode& e) {
  nlohmann::ordered_json j;
  j["show_id"] = e.show_id;
  j["episode_id"] = e.episode_id;
  j["show_title"] = e.show_title;
  j["show_description"] = e.show_description;
  j["episode_title"] = e.episode_title;
  j["episode_description"] = e.episode_description;
  j["duration_s"] = e.duration_s;
  j["first_streams"] = e.first_streams;
  j["qualified_streams"] = e.qualified_streams;
  if (e.published) j["published"] = *e.published;
  if (e.language_hint) j["language_hint"] = *e.language_hint;
  auto words = nlohmann::ordered_json::array();
  for (const auto& w : e.words) {
    nlohmann::ordered_json wj;
    wj["t"] = w.token;
    wj["s"] = w.start_s;
    wj["e"] = w.end_s;
    words.push_back(std::move(wj));
  }
  j["words"] = std::move(words);
  return j;
}

// Reads newline-delimited episode records. Blank lines and lines starting
// with '#' (artifact headers) are skipped.
inline Corpus read_corpus(std::istream& in) {
  Corpus c;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    c.episodes.push_back(parse_episode(t, lineno));
  }
  return c;
}

inline Corpus load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus: " + path);
  return read_corpus(in);
}

inline void write_corpus(const Corpus& c, std::ostream& out) {
  for (const auto& e : c.episodes) out << episode_to_json(e).dump() << '\n';
}

// ---------------------------------------------------------------------------
// Filtering

using LanguageDetector = std::function<std::string(std::string_view)>;

// Keeps episodes that are long enough, streamed enough and in the target
// language, then one representative per show: the most-streamed episode,
// ties to the smallest episode_id. Output is ordered by show_id.
inline Corpus apply_filters(const Corpus& corpus, const FilterConfig& cfg,
                            const LanguageDetector& detect) {
  if (corpus.filtered) throw ConfigError("apply_filters: corpus is already filtered");
  std::map<std::string, const Episode*> best;
  for (const auto& e : corpus.episodes) {
    if (e.duration_s < cfg.min_duration_s) continue;
    if (e.first_streams < cfg.min_streams) continue;
    const std::string lang = e.language_hint ? *e.language_hint : detect(e.description());
    if (lang != cfg.language) continue;
    auto [it, inserted] = best.emplace(e.show_id, &e);
    if (!inserted) {
      const Episode* cur = it->second;
      if (e.first_streams > cur->first_streams ||
          (e.first_streams == cur->first_streams && e.episode_id < cur->episode_id)) {
        it->second = &e;
      }
    }
  }
  Corpus out;
  out.filtered = true;
  out.episodes.reserve(best.size());
  for (const auto& [show, ep] : best) out.episodes.push_back(*ep);
  return out;
}

// Keeps words that start strictly before truncate_s.
inline Episode truncate_transcript(const Episode& episode, double truncate_s) {
  if (!(truncate_s > 0.0)) throw ConfigError("truncate_transcript: truncate_s must be > 0");
  Episode out = episode;
  const auto cut = std::partition_point(out.words.begin(), out.words.end(),
                                        [&](const TranscriptWord& w) { return w.start_s < truncate_s; });
  out.words.erase(cut, out.words.end());
  return out;
}

// Transcript text reconstructed from aligned tokens.
inline std::string transcript_text(const Episode& e) {
  std::string out;
  for (const auto& w : e.words) {
    if (!out.empty()) out.push_back(' ');
    out += w.token;
  }
  return out;
}

}  // namespace podstyle

#pragma once

// Word-emotion lexicon, the Dale-Chall easy-word list, and sentence scorers.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "podstyle/common.hpp"
#include "podstyle/textkit/token.hpp"
#include "podstyle/textkit/utf8.hpp"

namespace podstyle {

enum class Emotion : unsigned char {
  anger, anticipation, disgust, fear, joy, sadness, surprise, trust, positive, negative
};

inline constexpr std::size_t kNumEmotions = 10;

inline constexpr std::array<std::string_view, kNumEmotions> kEmotionNames = {
    "anger", "anticipation", "disgust", "fear", "joy",
    "sadness", "surprise", "trust", "positive", "negative"};

inline std::optional<Emotion> parse_emotion(std::string_view s) {
  for (std::size_t i = 0; i < kNumEmotions; ++i) {
    if (kEmotionNames[i] == s) return static_cast<Emotion>(i);
  }
  return std::nullopt;
}

// Bit i set <=> label kEmotionNames[i].
using EmotionMask = std::uint16_t;

inline constexpr EmotionMask bit(Emotion e) {
  return static_cast<EmotionMask>(1u << static_cast<unsigned>(e));
}

class EmotionLexicon {
 public:
  void add(std::string_view word, Emotion e) { labels_[utf8::fold(word)] |= bit(e); }

  EmotionMask labels(std::string_view folded_word) const {
    const auto it = labels_.find(std::string(folded_word));
    return it == labels_.end() ? EmotionMask{0} : it->second;
  }

  bool has(std::string_view folded_word, Emotion e) const { return labels(folded_word) & bit(e); }

  std::size_t size() const { return labels_.size(); }

  const std::unordered_map<std::string, EmotionMask>& entries() const { return labels_; }

  bool operator==(const EmotionLexicon&) const = default;

 private:
  std::unordered_map<std::string, EmotionMask> labels_;
};

// Rows are "word<TAB>label<TAB>{0|1}"; rows with flag 0 carry no label.
inline EmotionLexicon read_emotion_lexicon(std::istream& in) {
  EmotionLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    const auto fail = [&](const std::string& why) {
      throw DataError("emotion lexicon line " + std::to_string(lineno) + ": " + why);
    };
    if (cols.size() != 3) fail("expected word<TAB>label<TAB>flag");
    if (trim(cols[0]).empty()) fail("empty word");
    const auto label = parse_emotion(trim(cols[1]));
    if (!label) fail("unknown label '" + cols[1] + "'");
    const auto flag = trim(cols[2]);
    if (flag == "1") {
      lex.add(trim(cols[0]), *label);
    } else if (flag != "0") {
      fail("association flag must be 0 or 1");
    }
  }
  return lex;
}

inline EmotionLexicon load_emotion_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open emotion lexicon: " + path);
  return read_emotion_lexicon(in);
}

// Case-folded "easy" words for the Dale-Chall difficulty lookup.
class EasyWordSet {
 public:
  EasyWordSet() = default;
  explicit EasyWordSet(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  bool contains(std::string_view folded) const { return words_.count(std::string(folded)) > 0; }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

inline EasyWordSet read_easy_words(std::istream& in) {
  std::unordered_set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.insert(utf8::fold(w));
  }
  if (words.empty()) throw DataError("easy-word list is empty");
  return EasyWordSet(std::move(words));
}

inline EasyWordSet load_easy_words(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open easy-word list: " + path);
  return read_easy_words(in);
}

// ---------------------------------------------------------------------------
// Sentence scorers

// Which text a sentence came from; external score tables key on it.
enum class TextSide : unsigned char { desc, trans };

inline std::string_view to_string(TextSide s) { return s == TextSide::desc ? "desc" : "trans"; }

struct SentenceRef {
  std::string_view episode_id;
  TextSide side = TextSide::trans;
  std::size_t index = 0;
  const Sentence* tokens = nullptr;
};

// Maps a sentence to a polarity score in [-1, +1].
class SentenceScorer {
 public:
  virtual ~SentenceScorer() = default;
  double score(const SentenceRef& s) const { return std::clamp(raw_score(s), -1.0, 1.0); }

 protected:
  virtual double raw_score(const SentenceRef& s) const = 0;
};

// (P - N) / (P + N) over tokens labeled positive / negative; 0 without hits.
inline double lexicon_sentence_score(const Sentence& tokens, const EmotionLexicon& lex) {
  std::size_t pos = 0, neg = 0;
  for (const auto& t : tokens) {
    const EmotionMask m = lex.labels(t.norm);
    if (m & bit(Emotion::positive)) ++pos;
    if (m & bit(Emotion::negative)) ++neg;
  }
  if (pos + neg == 0) return 0.0;
  return (static_cast<double>(pos) - static_cast<double>(neg)) / static_cast<double>(pos + neg);
}

class LexiconSentenceScorer : public SentenceScorer {
 public:
  explicit LexiconSentenceScorer(const EmotionLexicon& lex) : lex_(&lex) {}

 protected:
  double raw_score(const SentenceRef& s) const override {
    return s.tokens ? lexicon_sentence_score(*s.tokens, *lex_) : 0.0;
  }

 private:
  const EmotionLexicon* lex_;
};

// Precomputed scores keyed by (episode_id, side, sentence_index). Sentences
// missing from the table fall back to `fallback` when given, else score 0.
class ExternalScoreTable : public SentenceScorer {
 public:
  void set(std::string episode_id, TextSide side, std::size_t index, double score) {
    scores_[{std::move(episode_id), side, index}] = score;
  }
  void set_fallback(const SentenceScorer* fallback) { fallback_ = fallback; }
  std::size_t size() const { return scores_.size(); }

 protected:
  double raw_score(const SentenceRef& s) const override {
    const auto it = scores_.find({std::string(s.episode_id), s.side, s.index});
    if (it != scores_.end()) return it->second;
    return fallback_ ? fallback_->score(s) : 0.0;
  }

 private:
  std::map<std::tuple<std::string, TextSide, std::size_t>, double> scores_;
  const SentenceScorer* fallback_ = nullptr;
};

// Newline-delimited {"episode_id", "sentence_index", "score"} records, with
// optional "side": "desc" | "trans" (default "trans").
inline ExternalScoreTable read_external_scores(std::istream& in) {
  ExternalScoreTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      const auto j = nlohmann::json::parse(t);
      TextSide side = TextSide::trans;
      if (j.contains("side")) {
        const auto s = j.at("side").get<std::string>();
        if (s == "desc") side = TextSide::desc;
        else if (s != "trans") throw DataError("side must be 'desc' or 'trans'");
      }
      const double score = j.at("score").get<double>();
      if (!std::isfinite(score)) throw DataError("score must be finite");
      table.set(j.at("episode_id").get<std::string>(), side, j.at("sentence_index").get<std::size_t>(),
                score);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("sentence scores line " + std::to_string(lineno) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError("sentence scores line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return table;
}

}  // namespace podstyle

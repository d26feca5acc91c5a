#pragma once

// The per-episode linguistic feature battery.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/corpus.hpp"
#include "podstyle/lexicons.hpp"
#include "podstyle/textkit/normalize.hpp"
#include "podstyle/textkit/syllables.hpp"
#include "podstyle/textkit/tagger.hpp"
#include "podstyle/textkit/tokenize.hpp"
#include "podstyle/topics.hpp"

namespace podstyle {

// ---------------------------------------------------------------------------
// Unigram language model

// Add-k smoothed unigram model with one shared unknown type:
// p(w) = (count(w) + k) / (total + k (V + 1)).
struct UnigramLM {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::uint64_t total = 0;
  double k = 1.0;

  std::size_t vocab_size() const { return counts.size(); }

  double prob(std::string_view w) const {
    const auto it = counts.find(std::string(w));
    const double c = it == counts.end() ? 0.0 : static_cast<double>(it->second);
    return (c + k) / (static_cast<double>(total) + k * static_cast<double>(vocab_size() + 1));
  }

  double unknown_prob() const {
    return k / (static_cast<double>(total) + k * static_cast<double>(vocab_size() + 1));
  }
};

inline UnigramLM build_unigram_lm(const std::vector<std::vector<std::string>>& docs, double k = 1.0) {
  if (docs.empty()) throw DataError("build_unigram_lm: empty corpus");
  if (!(k > 0.0)) throw ConfigError("build_unigram_lm: smoothing constant must be > 0");
  UnigramLM lm;
  lm.k = k;
  for (const auto& d : docs) {
    for (const auto& w : d) {
      ++lm.counts[w];
      ++lm.total;
    }
  }
  return lm;
}

// Mean -log2 p over `sample_n` tokens drawn without replacement, averaged
// over `runs` draws. Texts no longer than sample_n use every token each run.
inline double distinctiveness(const std::vector<std::string>& tokens, const UnigramLM& lm,
                              std::size_t sample_n, int runs, std::uint64_t seed) {
  if (tokens.empty()) throw DataError("distinctiveness: empty text");
  if (sample_n < 1 || runs < 1) throw ConfigError("distinctiveness: sample_n and runs must be >= 1");
  std::vector<double> cost(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) cost[i] = -std::log2(lm.prob(tokens[i]));
  if (tokens.size() <= sample_n) {
    return std::accumulate(cost.begin(), cost.end(), 0.0) / static_cast<double>(cost.size());
  }
  Rng rng(seed);
  std::vector<std::size_t> idx(tokens.size());
  double sum_runs = 0.0;
  for (int r = 0; r < runs; ++r) {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double s = 0.0;
    for (std::size_t i = 0; i < sample_n; ++i) {
      const std::size_t j = i + rng.below(idx.size() - i);
      std::swap(idx[i], idx[j]);
      s += cost[idx[i]];
    }
    sum_runs += s / static_cast<double>(sample_n);
  }
  return sum_runs / static_cast<double>(runs);
}

// ---------------------------------------------------------------------------
// TF-IDF faithfulness

// idf(t) = ln((1 + N) / (1 + df(t))) + 1.
struct IdfTable {
  std::unordered_map<std::string, std::uint64_t> df;
  std::uint64_t num_docs = 0;

  double idf(std::string_view t) const {
    const auto it = df.find(std::string(t));
    const double d = it == df.end() ? 0.0 : static_cast<double>(it->second);
    return std::log((1.0 + static_cast<double>(num_docs)) / (1.0 + d)) + 1.0;
  }
};

inline IdfTable build_idf(const std::vector<std::vector<std::string>>& docs) {
  IdfTable t;
  t.num_docs = docs.size();
  for (const auto& d : docs) {
    std::unordered_set<std::string_view> seen(d.begin(), d.end());
    for (auto w : seen) ++t.df[std::string(w)];
  }
  return t;
}

// Cosine of the tf-idf vectors of two token lists; 0 if either is empty.
inline double faithfulness(const std::vector<std::string>& a, const std::vector<std::string>& b,
                           const IdfTable& idf) {
  if (a.empty() || b.empty()) return 0.0;
  std::map<std::string_view, double> va, vb;
  for (const auto& w : a) va[w] += 1.0;
  for (const auto& w : b) vb[w] += 1.0;
  for (auto& [w, x] : va) x *= idf.idf(w);
  for (auto& [w, x] : vb) x *= idf.idf(w);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [w, x] : va) {
    na += x * x;
    const auto it = vb.find(w);
    if (it != vb.end()) dot += x * it->second;
  }
  for (const auto& [w, x] : vb) nb += x * x;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Readability

// Word tokens for readability: PUNCT/SYM excluded when tagged, otherwise
// anything without a letter or digit.
inline bool counts_as_word(const Token& t) {
  if (t.pos) return *t.pos != PosTag::PUNCT && *t.pos != PosTag::SYM;
  return is_word_token(t);
}

struct ReadabilityCounts {
  std::size_t sentences = 0;
  std::size_t words = 0;
  std::size_t syllables = 0;
};

inline ReadabilityCounts readability_counts(const std::vector<Sentence>& sentences) {
  ReadabilityCounts c;
  for (const auto& s : sentences) {
    std::size_t words = 0;
    for (const auto& t : s) {
      if (!counts_as_word(t)) continue;
      ++words;
      c.syllables += static_cast<std::size_t>(count_syllables(t.surface));
    }
    if (words > 0) ++c.sentences;
    c.words += words;
  }
  return c;
}

inline double flesch_kincaid(const std::vector<Sentence>& sentences) {
  const auto c = readability_counts(sentences);
  if (c.words == 0) throw DataError("flesch_kincaid: no word tokens");
  const double wps = static_cast<double>(c.words) / static_cast<double>(c.sentences);
  const double spw = static_cast<double>(c.syllables) / static_cast<double>(c.words);
  return 0.39 * wps + 11.8 * spw - 15.59;
}

// A word is difficult when neither its folded form nor that form without a
// final "s" is on the easy list.
inline bool is_difficult(std::string_view folded, const EasyWordSet& easy) {
  if (easy.contains(folded)) return false;
  if (folded.size() > 1 && folded.back() == 's' && easy.contains(folded.substr(0, folded.size() - 1))) {
    return false;
  }
  return true;
}

inline double dale_chall(const std::vector<Sentence>& sentences, const EasyWordSet& easy) {
  std::size_t words = 0, difficult = 0, sents = 0;
  for (const auto& s : sentences) {
    std::size_t w_in = 0;
    for (const auto& t : s) {
      if (!counts_as_word(t)) continue;
      ++w_in;
      if (is_difficult(t.norm, easy)) ++difficult;
    }
    if (w_in > 0) ++sents;
    words += w_in;
  }
  if (words == 0) throw DataError("dale_chall: no word tokens");
  const double pct = 100.0 * static_cast<double>(difficult) / static_cast<double>(words);
  double score = 0.1579 * pct + 0.0496 * (static_cast<double>(words) / static_cast<double>(sents));
  if (pct > 5.0) score += 3.6365;
  return score;
}

// ---------------------------------------------------------------------------
// Bag-of-words features

inline double vocab_entropy(const std::vector<std::string>& tokens) {
  if (tokens.empty()) throw DataError("vocab_entropy: empty text");
  std::map<std::string_view, std::size_t> freq;
  for (const auto& t : tokens) ++freq[t];
  const double n = static_cast<double>(tokens.size());
  double h = 0.0;
  for (const auto& [w, c] : freq) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h <= 0.0 ? 0.0 : h;
}

using EmotionFractions = std::array<double, kNumEmotions>;

// Share of tokens carrying each label; multi-label words count for each.
inline EmotionFractions emotion_proportions(const std::vector<std::string>& tokens,
                                            const EmotionLexicon& lex) {
  EmotionFractions out{};
  if (tokens.empty()) return out;
  std::array<std::size_t, kNumEmotions> hits{};
  for (const auto& t : tokens) {
    const EmotionMask m = lex.labels(t);
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      if (m & (1u << e)) ++hits[e];
    }
  }
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    out[e] = static_cast<double>(hits[e]) / static_cast<double>(tokens.size());
  }
  return out;
}

struct PolarityFractions {
  double positive = 0.0;
  double negative = 0.0;
};

// Shares of sentences scoring strictly above +threshold / below -threshold.
inline PolarityFractions sentence_polarity(const std::vector<Sentence>& sentences,
                                           const SentenceScorer& scorer, std::string_view episode_id,
                                           TextSide side, double threshold = 0.5) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw ConfigError("sentence_polarity: threshold must be in (0, 1)");
  PolarityFractions out;
  if (sentences.empty()) return out;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const double s = scorer.score({episode_id, side, i, &sentences[i]});
    if (s > threshold) ++pos;
    if (s < -threshold) ++neg;
  }
  out.positive = static_cast<double>(pos) / static_cast<double>(sentences.size());
  out.negative = static_cast<double>(neg) / static_cast<double>(sentences.size());
  return out;
}

struct PosFractions {
  std::array<double, kNumPosTags> share{};
  bool empty = true;
};

inline PosFractions pos_proportions(const std::vector<Token>& tagged) {
  PosFractions out;
  if (tagged.empty()) return out;
  std::array<std::size_t, kNumPosTags> counts{};
  for (const auto& t : tagged) {
    if (!t.pos) throw DataError("pos_proportions: untagged token '" + t.surface + "'");
    ++counts[index_of(*t.pos)];
  }
  for (std::size_t k = 0; k < kNumPosTags; ++k) {
    out.share[k] = static_cast<double>(counts[k]) / static_cast<double>(tagged.size());
  }
  out.empty = false;
  return out;
}

// ---------------------------------------------------------------------------
// Timing

// Total length of the union of word intervals, clipped to [0, limit_s].
inline double speech_time(const std::vector<TranscriptWord>& words, double limit_s) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(words.size());
  for (const auto& w : words) {
    const double s = std::clamp(w.start_s, 0.0, limit_s);
    const double e = std::clamp(w.end_s, 0.0, limit_s);
    if (e > s) iv.emplace_back(s, e);
  }
  std::sort(iv.begin(), iv.end());
  double total = 0.0;
  double cur_s = 0.0, cur_e = -1.0;
  for (const auto& [s, e] : iv) {
    if (s > cur_e) {
      if (cur_e > cur_s) total += cur_e - cur_s;
      cur_s = s;
      cur_e = e;
    } else {
      cur_e = std::max(cur_e, e);
    }
  }
  if (cur_e > cur_s) total += cur_e - cur_s;
  return total;
}

// Words per minute of merged speech time inside the window; 0 without speech.
inline double speech_rate(const std::vector<TranscriptWord>& words, double window_s) {
  if (!(window_s > 0.0)) throw ConfigError("speech_rate: window must be > 0");
  std::size_t n = 0;
  for (const auto& w : words) {
    if (w.start_s < window_s) ++n;
  }
  const double t = speech_time(words, window_s);
  if (n == 0 || t <= 0.0) return 0.0;
  return static_cast<double>(n) / (t / 60.0);
}

inline double non_speech_time(const std::vector<TranscriptWord>& words, double truncate_s) {
  if (!(truncate_s > 0.0)) throw ConfigError("non_speech_time: truncate_s must be > 0");
  return std::max(0.0, truncate_s - speech_time(words, truncate_s));
}

// ---------------------------------------------------------------------------
// Extraneous (promotional) description content

class ExtraneousClassifier {
 public:
  virtual ~ExtraneousClassifier() = default;
  virtual bool is_extraneous(const SentenceRef& s) const = 0;
};

inline const std::vector<std::string>& default_promo_markers() {
  static const std::vector<std::string> markers = {
      "sponsored by", "promo code", "use code", "discount code", "support this podcast",
      "subscribe", "follow us", "follow me", "patreon", "check out", "visit our",
      "available on", "listen on", "rate and review", "leave a review", "advertising inquiries",
      "% off", "sign up", "donate", "merch"};
  return markers;
}

// Flags sentences containing a URL/handle placeholder or a marker phrase.
class MarkerClassifier : public ExtraneousClassifier {
 public:
  MarkerClassifier() : markers_(default_promo_markers()) {}
  explicit MarkerClassifier(std::vector<std::string> markers) : markers_(std::move(markers)) {
    for (auto& m : markers_) m = utf8::fold(m);
  }

  bool is_extraneous(const SentenceRef& s) const override {
    if (!s.tokens) return false;
    std::string joined = " ";
    for (const auto& t : *s.tokens) {
      if (t.norm == kUrlToken || t.norm == kHandleToken) return true;
      joined += t.norm;
      joined += ' ';
    }
    for (const auto& m : markers_) {
      if (joined.find(m) != std::string::npos) return true;
    }
    return false;
  }

 private:
  std::vector<std::string> markers_;
};

// Labels supplied per (episode_id, sentence_index) of the description;
// unlabeled sentences count as content.
class ExternalExtraneousLabels : public ExtraneousClassifier {
 public:
  void set(std::string episode_id, std::size_t index, bool extraneous) {
    labels_[{std::move(episode_id), index}] = extraneous;
  }
  bool is_extraneous(const SentenceRef& s) const override {
    const auto it = labels_.find({std::string(s.episode_id), s.index});
    return it != labels_.end() && it->second;
  }

 private:
  std::map<std::pair<std::string, std::size_t>, bool> labels_;
};

// JSONL rows {"episode_id": ..., "sentence_index": ..., "extraneous": true|false}.
inline ExternalExtraneousLabels read_extraneous_labels(std::istream& in) {
  ExternalExtraneousLabels labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      const auto j = nlohmann::json::parse(t);
      labels.set(j.at("episode_id").get<std::string>(), j.at("sentence_index").get<std::size_t>(),
                 j.at("extraneous").get<bool>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError("extraneous labels line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return labels;
}

struct AdSplit {
  double fraction = 0.0;
  std::vector<Sentence> content;
};

// Fraction of description sentences flagged extraneous, plus the remaining
// content sentences. `first_index` offsets sentence indices so the show and
// episode parts of a description can be classified separately.
inline AdSplit description_ad_fraction(const std::vector<Sentence>& sentences,
                                       const ExtraneousClassifier& classifier,
                                       std::string_view episode_id = {}, std::size_t first_index = 0) {
  AdSplit out;
  if (sentences.empty()) return out;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (classifier.is_extraneous({episode_id, TextSide::desc, first_index + i, &sentences[i]})) {
      ++flagged;
    } else {
      out.content.push_back(sentences[i]);
    }
  }
  out.fraction = static_cast<double>(flagged) / static_cast<double>(sentences.size());
  return out;
}

// ---------------------------------------------------------------------------
// Feature vector schema

struct FeatureColumn {
  std::string name;
  std::string group;  // ablation / report section
  std::string side;   // "desc", "trans" or "" for episode-level
};

namespace features_detail {

inline std::vector<FeatureColumn> make_columns() {
  std::vector<FeatureColumn> c;
  c.push_back({"audio_duration_s", "length", ""});
  c.push_back({"non_speech_s", "length", "trans"});
  c.push_back({"desc_len_tokens", "length", "desc"});
  c.push_back({"ad_frac_desc", "ads", "desc"});
  c.push_back({"ad_topic_frac_trans", "ads", "trans"});
  c.push_back({"faithfulness", "faithfulness", ""});
  c.push_back({"distinct_desc", "distinctiveness", "desc"});
  c.push_back({"distinct_trans", "distinctiveness", "trans"});
  c.push_back({"fk_desc", "reading_level", "desc"});
  c.push_back({"dc_desc", "reading_level", "desc"});
  c.push_back({"fk_trans", "reading_level", "trans"});
  c.push_back({"dc_trans", "reading_level", "trans"});
  c.push_back({"entropy_desc", "vocab_diversity", "desc"});
  c.push_back({"entropy_trans", "vocab_diversity", "trans"});
  for (std::string side : {"desc", "trans"}) {
    for (auto e : kEmotionNames) c.push_back({"emo_" + std::string(e) + "_" + side, "emotion", side});
  }
  c.push_back({"sent_pos_frac_desc", "sentence_sentiment", "desc"});
  c.push_back({"sent_neg_frac_desc", "sentence_sentiment", "desc"});
  c.push_back({"sent_pos_frac_trans", "sentence_sentiment", "trans"});
  c.push_back({"sent_neg_frac_trans", "sentence_sentiment", "trans"});
  for (std::string side : {"desc", "trans"}) {
    for (auto t : kPosTagNames) c.push_back({"pos_" + std::string(t) + "_" + side, "syntax", side});
    c.push_back({"pos_CONJ_" + side, "syntax", side});
  }
  c.push_back({"swear_topic_frac", "swear_filler", "trans"});
  c.push_back({"filler_topic_frac", "swear_filler", "trans"});
  c.push_back({"speech_rate_wpm", "speech_rate", "trans"});
  return c;
}

}  // namespace features_detail

// Fixed column order of every feature table (grouped as in the group-mean
// report). pos_CONJ_* is CCONJ + SCONJ.
inline const std::vector<FeatureColumn>& feature_columns() {
  static const std::vector<FeatureColumn> cols = features_detail::make_columns();
  return cols;
}

inline std::size_t feature_index(std::string_view name) {
  static const auto index = [] {
    std::unordered_map<std::string, std::size_t> m;
    const auto& cols = feature_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) m.emplace(cols[i].name, i);
    return m;
  }();
  const auto it = index.find(std::string(name));
  if (it == index.end()) throw ConfigError("unknown feature '" + std::string(name) + "'");
  return it->second;
}

struct FeatureVector {
  std::string episode_id;
  std::vector<double> values = std::vector<double>(feature_columns().size(), 0.0);
  bool desc_empty = false;
  bool trans_empty = false;

  double& operator[](std::string_view name) { return values[feature_index(name)]; }
  double operator[](std::string_view name) const { return values[feature_index(name)]; }

  bool operator==(const FeatureVector&) const = default;
};

// ---------------------------------------------------------------------------
// Extraction

struct FeatureConfig {
  std::size_t desc_sample_n = 100;
  std::size_t trans_sample_n = 1000;
  int sample_runs = 5;
  double truncate_s = 600.0;
  double polarity_threshold = 0.5;
  // Speech rate over the whole transcript instead of the truncated window.
  bool speech_rate_full_episode = false;
  std::uint64_t seed = 1;
};

// Tokenized texts of one episode, extraneous description sentences removed.
struct EpisodeTexts {
  std::vector<Sentence> desc;          // show + episode description (content only)
  std::vector<Sentence> episode_desc;  // episode description (content only)
  std::vector<Sentence> trans;         // truncated transcript
  double ad_frac_desc = 0.0;
  Episode truncated;
};

inline std::vector<std::string> word_norms(const std::vector<Sentence>& sentences) {
  std::vector<std::string> out;
  for (const auto& s : sentences) {
    for (const auto& t : s) {
      if (is_word_token(t)) out.push_back(t.norm);
    }
  }
  return out;
}

inline EpisodeTexts prepare_texts(const Episode& e, const ExtraneousClassifier& classifier,
                                  double truncate_s) {
  EpisodeTexts t;
  const auto show_sents = tokenize_sentences(e.show_description);
  const auto ep_sents = tokenize_sentences(e.episode_description);
  const auto show_split = description_ad_fraction(show_sents, classifier, e.episode_id, 0);
  const auto ep_split = description_ad_fraction(ep_sents, classifier, e.episode_id, show_sents.size());
  const std::size_t total = show_sents.size() + ep_sents.size();
  if (total > 0) {
    t.ad_frac_desc = (show_split.fraction * static_cast<double>(show_sents.size()) +
                      ep_split.fraction * static_cast<double>(ep_sents.size())) /
                     static_cast<double>(total);
  }
  t.desc = show_split.content;
  t.desc.insert(t.desc.end(), ep_split.content.begin(), ep_split.content.end());
  t.episode_desc = ep_split.content;
  t.truncated = truncate_transcript(e, truncate_s);
  t.trans = tokenize_sentences(transcript_text(t.truncated));
  return t;
}

struct FeatureResources {
  const UnigramLM* lm = nullptr;
  const IdfTable* idf = nullptr;
  const EmotionLexicon* emotions = nullptr;
  const EasyWordSet* easy = nullptr;
  const TaggerModel* tagger = nullptr;
  const SentenceScorer* scorer = nullptr;
  const ExtraneousClassifier* extraneous = nullptr;
  const SpecialTopicMap* special_topics = nullptr;
  FeatureConfig config;
};

namespace features_detail {

inline std::vector<Sentence> tag_sentences(const TaggerModel& model, const std::vector<Sentence>& sents) {
  std::vector<Sentence> out;
  out.reserve(sents.size());
  for (const auto& s : sents) out.push_back(pos_tag(model, s));
  return out;
}

inline void fill_side(FeatureVector& fv, const std::vector<Sentence>& sents, const std::string& side,
                      const FeatureResources& r, std::string_view episode_id, std::uint64_t seed,
                      std::size_t sample_n) {
  const auto norms = word_norms(sents);
  if (norms.empty()) return;
  fv["distinct_" + side] = distinctiveness(norms, *r.lm, sample_n, r.config.sample_runs, seed);
  const auto tagged = tag_sentences(*r.tagger, sents);
  fv["fk_" + side] = flesch_kincaid(tagged);
  fv["dc_" + side] = dale_chall(tagged, *r.easy);
  fv["entropy_" + side] = vocab_entropy(norms);
  const auto emo = emotion_proportions(norms, *r.emotions);
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    fv["emo_" + std::string(kEmotionNames[e]) + "_" + side] = emo[e];
  }
  const auto pol = sentence_polarity(sents, *r.scorer, episode_id,
                                     side == "desc" ? TextSide::desc : TextSide::trans,
                                     r.config.polarity_threshold);
  fv["sent_pos_frac_" + side] = pol.positive;
  fv["sent_neg_frac_" + side] = pol.negative;
  const auto pos = pos_proportions(flatten(tagged));
  for (std::size_t k = 0; k < kNumPosTags; ++k) {
    fv["pos_" + std::string(kPosTagNames[k]) + "_" + side] = pos.share[k];
  }
  fv["pos_CONJ_" + side] = pos.share[index_of(PosTag::CCONJ)] + pos.share[index_of(PosTag::SCONJ)];
}

}  // namespace features_detail

// Computes every feature for one episode. `texts` must come from
// prepare_texts on the same episode; `topics` is the episode's inferred
// topic mixture.
inline FeatureVector extract_features(const Episode& episode, const EpisodeTexts& texts,
                                      const DocTopics& topics, const FeatureResources& r) {
  if (!r.lm || !r.idf || !r.emotions || !r.easy || !r.tagger || !r.scorer || !r.special_topics) {
    throw ConfigError("extract_features: missing resource");
  }
  try {
    FeatureVector fv;
    fv.episode_id = episode.episode_id;
    const auto& cfg = r.config;
    const auto desc_norms = word_norms(texts.desc);
    const auto trans_norms = word_norms(texts.trans);
    fv.desc_empty = desc_norms.empty();
    fv.trans_empty = trans_norms.empty();

    fv["audio_duration_s"] = episode.duration_s;
    fv["non_speech_s"] = non_speech_time(texts.truncated.words, cfg.truncate_s);
    fv["desc_len_tokens"] = static_cast<double>(desc_norms.size());
    fv["ad_frac_desc"] = texts.ad_frac_desc;
    fv["faithfulness"] = faithfulness(word_norms(texts.episode_desc), trans_norms, *r.idf);

    features_detail::fill_side(fv, texts.desc, "desc", r, episode.episode_id,
                               derive_seed(cfg.seed, episode.episode_id, "desc"), cfg.desc_sample_n);
    features_detail::fill_side(fv, texts.trans, "trans", r, episode.episode_id,
                               derive_seed(cfg.seed, episode.episode_id, "trans"), cfg.trans_sample_n);

    const auto tf = topic_fractions(topics, *r.special_topics);
    fv["ad_topic_frac_trans"] = tf.ad;
    fv["swear_topic_frac"] = tf.swear;
    fv["filler_topic_frac"] = tf.filler;
    if (cfg.speech_rate_full_episode) {
      fv["speech_rate_wpm"] = speech_rate(episode.words, episode.duration_s + kAlignmentJitterS);
    } else {
      fv["speech_rate_wpm"] = speech_rate(texts.truncated.words, cfg.truncate_s);
    }
    return fv;
  } catch (const DataError& e) {
    throw DataError("episode '" + episode.episode_id + "': " + e.what());
  }
}

}  // namespace podstyle

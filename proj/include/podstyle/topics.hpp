#pragma once

// LDA topic model trained by collapsed Gibbs sampling, held-out inference,
// UMass coherence, and the curated ad/swear/filler topic roles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/textkit/normalize.hpp"
#include "podstyle/textkit/utf8.hpp"

namespace podstyle {

using TokenDoc = std::vector<std::string>;

struct LdaParams {
  int num_topics = 100;
  double alpha = -1.0;  // <= 0 means 50 / num_topics
  double beta = 0.01;
  int iterations = 1000;
  std::size_t min_count = 5;
  std::uint64_t seed = 1;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / num_topics; }
};

struct LdaModel {
  int num_topics = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, int> index;
  std::vector<std::int64_t> word_topic;    // vocab.size() x num_topics, row-major
  std::vector<std::int64_t> topic_totals;  // num_topics
  std::vector<double> loglik_trace;        // joint log-likelihood after each sweep

  std::size_t vocab_size() const { return vocab.size(); }
  std::int64_t count(std::size_t w, int k) const {
    return word_topic[w * static_cast<std::size_t>(num_topics) + static_cast<std::size_t>(k)];
  }
  int word_id(std::string_view w) const {
    const auto it = index.find(std::string(w));
    return it == index.end() ? -1 : it->second;
  }
};

struct DocTopics {
  std::vector<double> theta;
  bool empty = false;  // no in-vocabulary tokens; theta is uniform
};

// Snapshot handed to the per-sweep observer during training.
struct LdaSweepState {
  int sweep = 0;
  std::span<const std::int64_t> word_topic;
  std::span<const std::int64_t> topic_totals;
  std::size_t num_tokens = 0;
  double loglik = 0.0;
};

using LdaSweepObserver = std::function<void(const LdaSweepState&)>;

// ---------------------------------------------------------------------------
// Preprocessing

// Tokens kept for topic modelling: normalized words with a letter, at least
// two characters, not a stopword and not a URL/handle placeholder.
inline TokenDoc lda_tokens(const std::vector<std::string>& norms,
                           const std::unordered_set<std::string>& stopwords) {
  TokenDoc out;
  for (const auto& w : norms) {
    if (w.size() < 2 || w == kUrlToken || w == kHandleToken) continue;
    bool letter = false;
    for (std::size_t i = 0; i < w.size();) {
      if (utf8::is_letter(utf8::next(w, i))) {
        letter = true;
        break;
      }
    }
    if (!letter || stopwords.count(w)) continue;
    out.push_back(w);
  }
  return out;
}

inline std::unordered_set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stopword list: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto w = trim(line);
    if (!w.empty() && w.front() != '#') out.insert(utf8::fold(w));
  }
  return out;
}

namespace lda_detail {

inline double joint_loglik(const std::vector<std::int64_t>& nwk, const std::vector<std::int64_t>& nk,
                           const std::vector<std::int64_t>& ndk, const std::vector<std::int64_t>& nd,
                           std::size_t V, int K, double alpha, double beta) {
  const double Vb = static_cast<double>(V) * beta;
  double ll = K * (std::lgamma(Vb) - static_cast<double>(V) * std::lgamma(beta));
  for (int k = 0; k < K; ++k) {
    for (std::size_t w = 0; w < V; ++w) {
      const auto c = nwk[w * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
      if (c) ll += std::lgamma(static_cast<double>(c) + beta) - std::lgamma(beta);
    }
    ll -= std::lgamma(static_cast<double>(nk[static_cast<std::size_t>(k)]) + Vb) - std::lgamma(Vb);
  }
  const double Ka = K * alpha;
  for (std::size_t d = 0; d < nd.size(); ++d) {
    for (int k = 0; k < K; ++k) {
      const auto c = ndk[d * static_cast<std::size_t>(K) + static_cast<std::size_t>(k)];
      if (c) ll += std::lgamma(static_cast<double>(c) + alpha) - std::lgamma(alpha);
    }
    ll -= std::lgamma(static_cast<double>(nd[d]) + Ka) - std::lgamma(Ka);
  }
  return ll;
}

inline int sample_index(Rng& rng, std::vector<double>& cumulative) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto k = static_cast<int>(it - cumulative.begin());
  return std::min(k, static_cast<int>(cumulative.size()) - 1);
}

}  // namespace lda_detail

// Collapsed Gibbs sampling. Words occurring fewer than params.min_count
// times across `docs` are dropped first; vocabulary ids follow sorted order.
inline LdaModel train_lda(const std::vector<TokenDoc>& docs, const LdaParams& params,
                          const LdaSweepObserver& observer = {}) {
  if (params.num_topics < 1) throw ConfigError("train_lda: number of topics must be >= 1");
  if (params.iterations < 1) throw ConfigError("train_lda: iterations must be >= 1");
  if (!(params.beta > 0.0)) throw ConfigError("train_lda: beta must be > 0");
  const int K = params.num_topics;
  const double alpha = params.effective_alpha();
  const double beta = params.beta;

  std::map<std::string, std::size_t> freq;
  for (const auto& d : docs) {
    for (const auto& w : d) ++freq[w];
  }
  LdaModel m;
  m.num_topics = K;
  m.alpha = alpha;
  m.beta = beta;
  m.seed = params.seed;
  m.iterations = params.iterations;
  for (const auto& [w, c] : freq) {
    if (c >= params.min_count) {
      m.index.emplace(w, static_cast<int>(m.vocab.size()));
      m.vocab.push_back(w);
    }
  }
  if (m.vocab.empty()) throw DataError("train_lda: empty effective vocabulary");
  const std::size_t V = m.vocab.size();

  std::vector<std::vector<int>> ids(docs.size());
  std::size_t num_tokens = 0;
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (const auto& w : docs[d]) {
      const auto it = m.index.find(w);
      if (it != m.index.end()) ids[d].push_back(it->second);
    }
    num_tokens += ids[d].size();
  }

  const auto Ks = static_cast<std::size_t>(K);
  m.word_topic.assign(V * Ks, 0);
  m.topic_totals.assign(Ks, 0);
  std::vector<std::int64_t> ndk(docs.size() * Ks, 0), nd(docs.size(), 0);
  std::vector<std::vector<int>> z(docs.size());
  Rng rng(params.seed);
  for (std::size_t d = 0; d < docs.size(); ++d) {
    z[d].resize(ids[d].size());
    for (std::size_t i = 0; i < ids[d].size(); ++i) {
      const int k = static_cast<int>(rng.below(Ks));
      z[d][i] = k;
      ++m.word_topic[static_cast<std::size_t>(ids[d][i]) * Ks + static_cast<std::size_t>(k)];
      ++m.topic_totals[static_cast<std::size_t>(k)];
      ++ndk[d * Ks + static_cast<std::size_t>(k)];
      ++nd[d];
    }
  }

  const double Vb = static_cast<double>(V) * beta;
  std::vector<double> cum(Ks);
  for (int sweep = 0; sweep < params.iterations; ++sweep) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::int64_t* doc_counts = &ndk[d * Ks];
      for (std::size_t i = 0; i < ids[d].size(); ++i) {
        const auto w = static_cast<std::size_t>(ids[d][i]);
        std::int64_t* wt = &m.word_topic[w * Ks];
        const int old = z[d][i];
        --wt[old];
        --m.topic_totals[static_cast<std::size_t>(old)];
        --doc_counts[old];
        double acc = 0.0;
        for (std::size_t k = 0; k < Ks; ++k) {
          acc += (static_cast<double>(doc_counts[k]) + alpha) * (static_cast<double>(wt[k]) + beta) /
                 (static_cast<double>(m.topic_totals[k]) + Vb);
          cum[k] = acc;
        }
        const int k = lda_detail::sample_index(rng, cum);
        z[d][i] = k;
        ++wt[k];
        ++m.topic_totals[static_cast<std::size_t>(k)];
        ++doc_counts[k];
      }
    }
    const double ll = lda_detail::joint_loglik(m.word_topic, m.topic_totals, ndk, nd, V, K, alpha, beta);
    m.loglik_trace.push_back(ll);
    if (observer) observer({sweep, m.word_topic, m.topic_totals, num_tokens, ll});
  }
  return m;
}

// Held-out Gibbs sampling against frozen word-topic counts; theta is
// estimated from the final assignments as (n_k + alpha) / (n + K alpha).
inline DocTopics infer_doc_topics(const LdaModel& m, const TokenDoc& doc, int iterations,
                                  std::uint64_t seed) {
  const auto Ks = static_cast<std::size_t>(m.num_topics);
  DocTopics out;
  std::vector<int> ids;
  for (const auto& w : doc) {
    const int id = m.word_id(w);
    if (id >= 0) ids.push_back(id);
  }
  if (ids.empty()) {
    out.theta.assign(Ks, 1.0 / static_cast<double>(Ks));
    out.empty = true;
    return out;
  }
  const double Vb = static_cast<double>(m.vocab_size()) * m.beta;
  std::vector<std::int64_t> ndk(Ks, 0);
  std::vector<int> z(ids.size());
  Rng rng(seed);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    z[i] = static_cast<int>(rng.below(Ks));
    ++ndk[static_cast<std::size_t>(z[i])];
  }
  std::vector<double> phi_cache(Ks);
  std::vector<double> cum(Ks);
  for (int it = 0; it < std::max(1, iterations); ++it) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const auto w = static_cast<std::size_t>(ids[i]);
      --ndk[static_cast<std::size_t>(z[i])];
      double acc = 0.0;
      for (std::size_t k = 0; k < Ks; ++k) {
        acc += (static_cast<double>(ndk[k]) + m.alpha) *
               (static_cast<double>(m.word_topic[w * Ks + k]) + m.beta) /
               (static_cast<double>(m.topic_totals[k]) + Vb);
        cum[k] = acc;
      }
      z[i] = lda_detail::sample_index(rng, cum);
      ++ndk[static_cast<std::size_t>(z[i])];
    }
  }
  const double denom = static_cast<double>(ids.size()) + static_cast<double>(Ks) * m.alpha;
  out.theta.resize(Ks);
  for (std::size_t k = 0; k < Ks; ++k) out.theta[k] = (static_cast<double>(ndk[k]) + m.alpha) / denom;
  return out;
}

// Highest-count words of a topic, ties broken lexicographically.
inline std::vector<std::string> top_words(const LdaModel& m, int topic, std::size_t n) {
  if (topic < 0 || topic >= m.num_topics) {
    throw ConfigError("top_words: topic index " + std::to_string(topic) + " out of range");
  }
  if (n == 0) throw ConfigError("top_words: n must be >= 1");
  std::vector<std::size_t> order(m.vocab_size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const std::size_t take = std::min(n, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(take), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const auto ca = m.count(a, topic), cb = m.count(b, topic);
                      if (ca != cb) return ca > cb;
                      return m.vocab[a] < m.vocab[b];
                    });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(m.vocab[order[i]]);
  return out;
}

// Document co-occurrence counts for a fixed word list.
class CooccurrenceCounts {
 public:
  CooccurrenceCounts(const std::vector<TokenDoc>& docs, const std::vector<std::string>& words) {
    for (std::size_t i = 0; i < words.size(); ++i) slot_.emplace(words[i], i);
    const std::size_t n = words.size();
    single_.assign(n, 0);
    pair_.assign(n * n, 0);
    std::vector<char> present(n);
    std::vector<std::size_t> hits;
    for (const auto& d : docs) {
      std::fill(present.begin(), present.end(), 0);
      hits.clear();
      for (const auto& w : d) {
        const auto it = slot_.find(w);
        if (it != slot_.end() && !present[it->second]) {
          present[it->second] = 1;
          hits.push_back(it->second);
        }
      }
      for (std::size_t a : hits) {
        ++single_[a];
        for (std::size_t b : hits) ++pair_[a * n + b];
      }
    }
    n_ = n;
  }

  std::size_t doc_count(const std::string& w) const { return single_.at(slot_.at(w)); }
  std::size_t co_count(const std::string& a, const std::string& b) const {
    return pair_.at(slot_.at(a) * n_ + slot_.at(b));
  }

 private:
  std::unordered_map<std::string, std::size_t> slot_;
  std::vector<std::size_t> single_;
  std::vector<std::size_t> pair_;
  std::size_t n_ = 0;
};

// Mean over topics of sum_{i>j} log((D(w_i, w_j) + 1) / D(w_j)) over each
// topic's top words w_1..w_topN, with D counted over `docs`.
inline double coherence_umass(const LdaModel& m, const std::vector<TokenDoc>& docs, std::size_t top_n) {
  if (top_n < 2) throw ConfigError("coherence_umass: top_n must be >= 2");
  std::vector<std::vector<std::string>> tops;
  std::set<std::string> all;
  for (int k = 0; k < m.num_topics; ++k) {
    tops.push_back(top_words(m, k, top_n));
    all.insert(tops.back().begin(), tops.back().end());
  }
  const CooccurrenceCounts counts(docs, std::vector<std::string>(all.begin(), all.end()));
  double total = 0.0;
  for (const auto& words : tops) {
    double c = 0.0;
    for (std::size_t i = 1; i < words.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        const auto dj = counts.doc_count(words[j]);
        PODSTYLE_ENSURE(dj > 0, "coherence_umass: top word '" + words[j] + "' occurs in no document");
        c += std::log((static_cast<double>(counts.co_count(words[i], words[j])) + 1.0) /
                      static_cast<double>(dj));
      }
    }
    total += c;
  }
  return total / static_cast<double>(m.num_topics);
}

struct TopicCountChoice {
  int best = 0;
  std::vector<std::pair<int, double>> scores;  // (K, coherence) in grid order
};

// Trains one model per grid value and keeps the most coherent; ties go to
// the smaller K. Alpha follows 50/K unless params.alpha is set.
inline TopicCountChoice select_topic_count(const std::vector<TokenDoc>& docs, const std::vector<int>& grid,
                                           LdaParams params, std::size_t top_n = 10) {
  if (grid.empty()) throw ConfigError("select_topic_count: empty grid");
  TopicCountChoice choice;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int K : grid) {
    params.num_topics = K;
    const LdaModel m = train_lda(docs, params);
    const double s = coherence_umass(m, docs, top_n);
    choice.scores.emplace_back(K, s);
    if (s > best_score || (s == best_score && K < choice.best)) {
      best_score = s;
      choice.best = K;
    }
  }
  return choice;
}

// ---------------------------------------------------------------------------
// Special topic roles

enum class TopicRole : unsigned char { ad, swear, filler };

inline constexpr std::array<std::string_view, 3> kTopicRoleNames = {"ad", "swear", "filler"};

struct SpecialTopicMap {
  std::array<std::set<int>, 3> topics;

  std::set<int>& operator[](TopicRole r) { return topics[static_cast<std::size_t>(r)]; }
  const std::set<int>& operator[](TopicRole r) const { return topics[static_cast<std::size_t>(r)]; }

  void validate(int num_topics) const {
    for (const auto& s : topics) {
      for (int k : s) {
        if (k < 0 || k >= num_topics) {
          throw DataError("special topic index " + std::to_string(k) + " out of range");
        }
      }
    }
  }
};

struct TopicFractions {
  double ad = 0.0;
  double swear = 0.0;
  double filler = 0.0;
};

inline TopicFractions topic_fractions(const DocTopics& dt, const SpecialTopicMap& special) {
  const auto sum = [&](TopicRole r) {
    double s = 0.0;
    for (int k : special[r]) {
      if (k < 0 || static_cast<std::size_t>(k) >= dt.theta.size()) {
        throw DataError("special topic index " + std::to_string(k) + " out of range");
      }
      s += dt.theta[static_cast<std::size_t>(k)];
    }
    return s;
  };
  return {sum(TopicRole::ad), sum(TopicRole::swear), sum(TopicRole::filler)};
}

// Review file: "topic_index<TAB>role[<TAB>top words]"; role "-" or empty
// leaves the topic unassigned.
inline SpecialTopicMap read_topic_review(std::istream& in) {
  SpecialTopicMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() < 2) {
      throw DataError("topic review line " + std::to_string(lineno) + ": expected topic_index<TAB>role");
    }
    const int k = static_cast<int>(parse_int(cols[0]));
    const auto role = trim(cols[1]);
    if (role.empty() || role == "-") continue;
    bool found = false;
    for (std::size_t r = 0; r < kTopicRoleNames.size(); ++r) {
      if (kTopicRoleNames[r] == role) {
        map.topics[r].insert(k);
        found = true;
      }
    }
    if (!found) {
      throw DataError("topic review line " + std::to_string(lineno) + ": unknown role '" + std::string(role) + "'");
    }
  }
  return map;
}

inline SpecialTopicMap load_topic_review(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open topic review file: " + path);
  return read_topic_review(in);
}

inline void write_topic_review(const LdaModel& m, const SpecialTopicMap& map, std::ostream& out,
                               std::size_t shown = 20) {
  for (int k = 0; k < m.num_topics; ++k) {
    std::string role = "-";
    for (std::size_t r = 0; r < 3; ++r) {
      if (map.topics[r].count(k)) role = std::string(kTopicRoleNames[r]);
    }
    out << k << '\t' << role << '\t';
    const auto words = top_words(m, k, shown);
    for (std::size_t i = 0; i < words.size(); ++i) out << (i ? " " : "") << words[i];
    out << '\n';
  }
}

// Suggests roles from seed word lists: a topic takes a role when at least
// `min_share` of its top words are seeds for that role. Meant to pre-fill a
// review file, not to replace the review.
inline SpecialTopicMap suggest_topic_roles(const LdaModel& m,
                                           const std::map<TopicRole, std::unordered_set<std::string>>& seeds,
                                           std::size_t top_n = 10, double min_share = 0.5) {
  SpecialTopicMap map;
  for (int k = 0; k < m.num_topics; ++k) {
    const auto words = top_words(m, k, top_n);
    for (const auto& [role, set] : seeds) {
      std::size_t hits = 0;
      for (const auto& w : words) hits += set.count(w);
      if (static_cast<double>(hits) >= min_share * static_cast<double>(words.size())) map[role].insert(k);
    }
  }
  return map;
}

// ---------------------------------------------------------------------------
// Serialization
//
//   podstyle-lda 1
//   K <K> alpha <a> beta <b> V <V> seed <seed> iterations <n>
//   vocab
//   <word>                      (V lines, id order)
//   counts
//   <n_w0> <n_w1> ... <n_wK-1>  (V rows)

inline void write_lda_model(const LdaModel& m, std::ostream& out) {
  out << "podstyle-lda 1\n";
  out << "K " << m.num_topics << " alpha " << format_double(m.alpha) << " beta " << format_double(m.beta)
      << " V " << m.vocab_size() << " seed " << m.seed << " iterations " << m.iterations << "\n";
  out << "vocab\n";
  for (const auto& w : m.vocab) out << w << '\n';
  out << "counts\n";
  for (std::size_t w = 0; w < m.vocab_size(); ++w) {
    for (int k = 0; k < m.num_topics; ++k) out << (k ? " " : "") << m.count(w, k);
    out << '\n';
  }
}

inline LdaModel read_lda_model(std::istream& in) {
  std::string line;
  const auto next = [&]() -> std::string& {
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] == '#') continue;
      return line;
    }
    throw DataError("LDA model: unexpected end of file");
  };
  if (next() != "podstyle-lda 1") throw DataError("LDA model: bad header");
  LdaModel m;
  std::size_t V = 0;
  {
    std::istringstream ss(next());
    std::string key, val;
    while (ss >> key >> val) {
      if (key == "K") m.num_topics = static_cast<int>(parse_int(val));
      else if (key == "alpha") m.alpha = parse_double(val);
      else if (key == "beta") m.beta = parse_double(val);
      else if (key == "V") V = static_cast<std::size_t>(parse_int(val));
      else if (key == "seed") m.seed = static_cast<std::uint64_t>(std::stoull(val));
      else if (key == "iterations") m.iterations = static_cast<int>(parse_int(val));
      else throw DataError("LDA model: unknown header key '" + key + "'");
    }
  }
  if (m.num_topics < 1) throw DataError("LDA model: K must be >= 1");
  if (next() != "vocab") throw DataError("LDA model: missing vocab block");
  for (std::size_t i = 0; i < V; ++i) {
    m.index.emplace(next(), static_cast<int>(i));
    m.vocab.push_back(line);
  }
  if (next() != "counts") throw DataError("LDA model: missing counts block");
  const auto Ks = static_cast<std::size_t>(m.num_topics);
  m.word_topic.assign(V * Ks, 0);
  m.topic_totals.assign(Ks, 0);
  for (std::size_t w = 0; w < V; ++w) {
    std::istringstream ss(next());
    for (std::size_t k = 0; k < Ks; ++k) {
      std::int64_t c = -1;
      if (!(ss >> c) || c < 0) throw DataError("LDA model: bad count row " + std::to_string(w));
      m.word_topic[w * Ks + k] = c;
      m.topic_totals[k] += c;
    }
  }
  return m;
}

inline LdaModel load_lda_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open LDA model: " + path);
  return read_lda_model(in);
}

}  // namespace podstyle

// Independent oracles and hand-built fixtures shared by the unit tests and
// the acceptance binary. Nothing here calls the code under test.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace oracle {

inline std::string data_path(std::string_view rel) { return std::string(PODSTYLE_DATA_DIR) + "/" + std::string(rel); }

// Dictionary syllable counts (standard pronunciations).
struct SyllableEntry {
  const char* word;
  int syllables;
};

inline constexpr std::array<SyllableEntry, 100> kSyllables = {{
    {"cat", 1},         {"table", 2},       {"queue", 1},        {"apple", 2},        {"banana", 3},
    {"computer", 3},    {"beautiful", 3},   {"elephant", 3},     {"tomato", 3},       {"water", 2},
    {"house", 1},       {"make", 1},        {"cake", 1},         {"jumped", 1},       {"wanted", 2},
    {"needed", 2},      {"makes", 1},       {"boxes", 2},        {"horses", 2},       {"simple", 2},
    {"little", 2},      {"people", 2},      {"happy", 2},        {"yellow", 2},       {"yes", 1},
    {"young", 1},       {"rhythm", 2},      {"agree", 2},        {"free", 1},         {"tree", 1},
    {"idea", 3},        {"music", 2},       {"paper", 2},        {"garden", 2},       {"window", 2},
    {"yesterday", 3},   {"tomorrow", 3},    {"basketball", 3},   {"football", 2},     {"player", 2},
    {"running", 2},     {"science", 2},     {"dog", 1},          {"teacher", 2},      {"school", 1},
    {"money", 2},       {"business", 2},    {"market", 2},       {"problem", 2},      {"question", 2},
    {"answer", 2},      {"minute", 2},      {"second", 2},       {"flight", 1},       {"engine", 2},
    {"animal", 3},      {"important", 3},   {"together", 3},     {"remember", 3},     {"holiday", 3},
    {"library", 3},     {"history", 3},     {"potato", 3},       {"magazine", 3},     {"energy", 3},
    {"vitamin", 3},     {"telephone", 3},   {"dinosaur", 3},     {"umbrella", 3},     {"furniture", 3},
    {"education", 4},   {"information", 4}, {"television", 4},   {"photography", 4},  {"university", 5},
    {"celebrity", 4},   {"unbelievable", 5},{"communication", 5},{"the", 1},          {"strength", 1},
    {"through", 1},     {"thought", 1},     {"laugh", 1},        {"eight", 1},        {"smile", 1},
    {"cheese", 1},      {"stone", 1},       {"create", 2},       {"ocean", 2},        {"poem", 2},
    {"lion", 2},        {"quiet", 2},       {"basic", 2},        {"moment", 2},       {"happen", 2},
    {"open", 2},        {"river", 2},       {"seven", 2},        {"sugar", 2},        {"planet", 2},
}};

// Ten-sentence readability fixture. Each word carries its dictionary
// syllable count and whether it is off the Dale-Chall easy list (after the
// final-s rule); both were tallied by hand against the shipped list.
struct HandWord {
  const char* text;
  int syllables;
  bool difficult;
};

struct HandSentence {
  const char* text;
  std::vector<HandWord> words;
};

inline const std::vector<HandSentence>& readability_fixture() {
  static const std::vector<HandSentence> s = {
      {"The cat sat on the mat.",
       {{"The", 1, false}, {"cat", 1, false}, {"sat", 1, false}, {"on", 1, false}, {"the", 1, false},
        {"mat", 1, false}}},
      {"My little brother plays football on Sunday.",
       {{"My", 1, false}, {"little", 2, false}, {"brother", 2, false}, {"plays", 1, false},
        {"football", 2, false}, {"on", 1, false}, {"Sunday", 2, false}}},
      {"Astronomers discovered a distant planet yesterday.",
       {{"Astronomers", 4, true}, {"discovered", 3, true}, {"a", 1, false}, {"distant", 2, true},
        {"planet", 2, true}, {"yesterday", 3, false}}},
      {"It was raining, so we stayed inside.",
       {{"It", 1, false}, {"was", 1, false}, {"raining", 2, true}, {"so", 1, false}, {"we", 1, false},
        {"stayed", 1, true}, {"inside", 2, false}}},
      {"Why did the company lose so much money?",
       {{"Why", 1, false}, {"did", 1, false}, {"the", 1, false}, {"company", 3, false}, {"lose", 1, false},
        {"so", 1, false}, {"much", 1, false}, {"money", 2, false}}},
      {"Grandma opened the old wooden door.",
       {{"Grandma", 2, false}, {"opened", 2, true}, {"the", 1, false}, {"old", 1, false},
        {"wooden", 2, false}, {"door", 1, false}}},
      {"We need to talk about the budget tomorrow.",
       {{"We", 1, false}, {"need", 1, false}, {"to", 1, false}, {"talk", 1, false}, {"about", 2, false},
        {"the", 1, false}, {"budget", 2, true}, {"tomorrow", 3, false}}},
      {"Honestly, the movie was terrible!",
       {{"Honestly", 3, true}, {"the", 1, false}, {"movie", 2, false}, {"was", 1, false},
        {"terrible", 3, false}}},
      {"Please call the office before noon.",
       {{"Please", 1, false}, {"call", 1, false}, {"the", 1, false}, {"office", 2, false},
        {"before", 2, false}, {"noon", 1, false}}},
      {"Five kids played basketball in the park.",
       {{"Five", 1, false}, {"kids", 1, false}, {"played", 1, true}, {"basketball", 3, true}, {"in", 1, false},
        {"the", 1, false}, {"park", 1, false}}},
  };
  return s;
}

inline std::string readability_text() {
  std::string t;
  for (const auto& s : readability_fixture()) t += std::string(t.empty() ? "" : " ") + s.text;
  return t;
}

inline double hand_flesch_kincaid(const std::vector<HandSentence>& f) {
  double words = 0, syl = 0;
  for (const auto& s : f) {
    for (const auto& w : s.words) {
      words += 1;
      syl += w.syllables;
    }
  }
  return 0.39 * (words / static_cast<double>(f.size())) + 11.8 * (syl / words) - 15.59;
}

inline double hand_dale_chall(const std::vector<HandSentence>& f) {
  double words = 0, hard = 0;
  for (const auto& s : f) {
    for (const auto& w : s.words) {
      words += 1;
      hard += w.difficult ? 1 : 0;
    }
  }
  const double pct = 100.0 * hard / words;
  return 0.1579 * pct + 0.0496 * (words / static_cast<double>(f.size())) + (pct > 5.0 ? 3.6365 : 0.0);
}

// Mean -log2 p over every token, with p from an add-k unigram model.
inline double exhaustive_cross_entropy(const std::vector<std::string>& text,
                                       const std::vector<std::vector<std::string>>& training, double k) {
  std::map<std::string, double> counts;
  double total = 0;
  for (const auto& d : training) {
    for (const auto& w : d) {
      counts[w] += 1;
      total += 1;
    }
  }
  const double denom = total + k * static_cast<double>(counts.size() + 1);
  double s = 0;
  for (const auto& w : text) {
    const auto it = counts.find(w);
    s -= std::log2(((it == counts.end() ? 0.0 : it->second) + k) / denom);
  }
  return s / static_cast<double>(text.size());
}

// Dense tf-idf over an explicit term list: tf = count, idf = ln((1+N)/(1+df))+1, L2 rows.
inline std::vector<std::vector<double>> dense_tfidf(const std::vector<std::vector<std::string>>& doc_terms,
                                                    const std::vector<std::string>& vocab) {
  const double N = static_cast<double>(doc_terms.size());
  std::vector<double> df(vocab.size(), 0);
  for (std::size_t j = 0; j < vocab.size(); ++j) {
    for (const auto& d : doc_terms) df[j] += std::count(d.begin(), d.end(), vocab[j]) > 0 ? 1 : 0;
  }
  std::vector<std::vector<double>> X;
  for (const auto& d : doc_terms) {
    std::vector<double> row(vocab.size(), 0.0);
    double norm = 0;
    for (std::size_t j = 0; j < vocab.size(); ++j) {
      const double tf = static_cast<double>(std::count(d.begin(), d.end(), vocab[j]));
      row[j] = tf * (std::log((1 + N) / (1 + df[j])) + 1);
      norm += row[j] * row[j];
    }
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (auto& v : row) v /= norm;
    }
    X.push_back(row);
  }
  return X;
}

inline double dense_cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return na == 0 || nb == 0 ? 0.0 : dot / std::sqrt(na * nb);
}

// Rank by counting: rank(i) = #{x_j < x_i} + (#{x_j == x_i} + 1) / 2.
inline std::vector<double> brute_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = less + (equal + 1) / 2;
  }
  return r;
}

inline double brute_spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = brute_ranks(x), ry = brute_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// Length of the union of intervals, by sweeping a fine grid of breakpoints.
inline double interval_union(std::vector<std::pair<double, double>> iv, double lo, double hi) {
  std::set<double> cuts{lo, hi};
  for (auto& [s, e] : iv) {
    s = std::clamp(s, lo, hi);
    e = std::clamp(e, lo, hi);
    cuts.insert(s);
    cuts.insert(e);
  }
  double total = 0;
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const double a = *it, b = *std::next(it), mid = (a + b) / 2;
    for (const auto& [s, e] : iv) {
      if (s <= mid && mid <= e) {
        total += b - a;
        break;
      }
    }
  }
  return total;
}

// Documents drawn from one of two disjoint 20-word vocabularies; label
// i % 2 says which.
struct LabeledDocs {
  std::vector<std::vector<std::string>> docs;
  std::vector<int> labels;
};

inline LabeledDocs two_topic_corpus(std::size_t n_docs, std::size_t doc_len, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> pick(0, 19);
  LabeledDocs out;
  for (std::size_t d = 0; d < n_docs; ++d) {
    const int label = static_cast<int>(d % 2);
    std::vector<std::string> doc;
    for (std::size_t i = 0; i < doc_len; ++i) doc.push_back((label ? "sport" : "garden") + std::to_string(pick(gen)));
    out.docs.push_back(std::move(doc));
    out.labels.push_back(label);
  }
  return out;
}

// Share of documents whose cluster's majority label equals their own.
inline double purity(const std::vector<int>& cluster, const std::vector<int>& label) {
  std::map<int, std::map<int, std::size_t>> table;
  for (std::size_t i = 0; i < cluster.size(); ++i) ++table[cluster[i]][label[i]];
  std::size_t hit = 0;
  for (const auto& [c, row] : table) {
    std::size_t best = 0;
    for (const auto& [l, n] : row) best = std::max(best, n);
    hit += best;
  }
  return static_cast<double>(hit) / static_cast<double>(cluster.size());
}

}  // namespace oracle

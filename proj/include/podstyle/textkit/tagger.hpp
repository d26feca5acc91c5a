#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/textkit/normalize.hpp"
#include "podstyle/textkit/token.hpp"
#include "podstyle/textkit/utf8.hpp"

namespace podstyle {

using TagWeights = std::array<double, kNumPosTags>;

// Averaged-perceptron part-of-speech model. Immutable once trained.
struct TaggerModel {
  std::string version = "podstyle-ap-1";
  std::unordered_map<std::string, TagWeights> weights;

  bool operator==(const TaggerModel&) const = default;
};

struct TaggedToken {
  std::string surface;
  PosTag tag;
};

using TaggedSentence = std::vector<TaggedToken>;

namespace tagger_detail {

inline bool is_symbol_char(char32_t c) {
  return c == '$' || c == '%' || c == '#' || c == '+' || c == '=' || c == '<' || c == '>' ||
         c == '^' || c == '|' || c == '~' || c == '\\' || c == '*' || c == 0xB0 ||
         c == 0x20AC || c == 0xA3;
}

// Tags fixed by surface form, applied before the model.
inline std::optional<PosTag> rule_tag(std::string_view surface) {
  if (surface.empty()) return PosTag::X;
  if (surface == kUrlToken || surface == kHandleToken) return PosTag::X;
  bool any_alnum = false, all_symbol = true, all_numeric = true;
  for (std::size_t i = 0; i < surface.size();) {
    const char32_t c = utf8::next(surface, i);
    if (utf8::is_alnum(c)) any_alnum = true;
    if (!is_symbol_char(c)) all_symbol = false;
    if (!utf8::is_digit(c) && c != '.' && c != ',') all_numeric = false;
  }
  if (!any_alnum) return all_symbol ? PosTag::SYM : PosTag::PUNCT;
  if (all_numeric) return PosTag::NUM;
  return std::nullopt;
}

inline std::string context_form(std::string_view surface) {
  bool has_digit = false, has_hyphen = false, all_digit = true;
  for (char c : surface) {
    if (c >= '0' && c <= '9') has_digit = true;
    else all_digit = false;
    if (c == '-') has_hyphen = true;
  }
  if (all_digit && surface.size() == 4) return "!YEAR";
  if (has_digit && !surface.empty() && surface[0] >= '0' && surface[0] <= '9') return "!DIGITS";
  if (has_hyphen && surface.front() != '-') return "!HYPHEN";
  return utf8::fold(surface);
}

inline std::string suffix(std::string_view w, std::size_t n) {
  return std::string(w.size() <= n ? w : w.substr(w.size() - n));
}

inline std::string shape(std::string_view surface) {
  std::string out;
  char last = 0;
  for (std::size_t i = 0; i < surface.size();) {
    const char32_t c = utf8::next(surface, i);
    char s = utf8::is_upper(c) ? 'X' : utf8::is_letter(c) ? 'x' : utf8::is_digit(c) ? 'd' : '-';
    if (s != last) out.push_back(s);
    last = s;
  }
  return out;
}

inline std::vector<std::string> features(std::size_t i, const std::vector<std::string>& surfaces,
                                         const std::vector<std::string>& context,
                                         std::string_view prev, std::string_view prev2) {
  // context is padded with two start and two end markers.
  const std::size_t c = i + 2;
  const std::string& word = context[c];
  std::vector<std::string> f;
  f.reserve(16);
  f.emplace_back("bias");
  f.push_back("i suffix " + suffix(word, 3));
  f.push_back("i suffix2 " + suffix(word, 2));
  f.push_back("i pref1 " + word.substr(0, 1));
  f.push_back("i shape " + shape(surfaces[i]));
  f.push_back("i-1 tag " + std::string(prev));
  f.push_back("i-2 tag " + std::string(prev2));
  f.push_back("i tag+i-2 tag " + std::string(prev) + " " + std::string(prev2));
  f.push_back("i word " + word);
  f.push_back("i-1 tag+i word " + std::string(prev) + " " + word);
  f.push_back("i-1 word " + context[c - 1]);
  f.push_back("i-1 suffix " + suffix(context[c - 1], 3));
  f.push_back("i-2 word " + context[c - 2]);
  f.push_back("i+1 word " + context[c + 1]);
  f.push_back("i+1 suffix " + suffix(context[c + 1], 3));
  f.push_back("i+2 word " + context[c + 2]);
  return f;
}

inline std::vector<std::string> padded_context(const std::vector<std::string>& surfaces) {
  std::vector<std::string> ctx{"-START-", "-START2-"};
  for (const auto& s : surfaces) ctx.push_back(context_form(s));
  ctx.emplace_back("-END-");
  ctx.emplace_back("-END2-");
  return ctx;
}

inline std::size_t best_tag(const std::unordered_map<std::string, TagWeights>& weights,
                            const std::vector<std::string>& feats) {
  TagWeights scores{};
  for (const auto& f : feats) {
    const auto it = weights.find(f);
    if (it == weights.end()) continue;
    for (std::size_t t = 0; t < kNumPosTags; ++t) scores[t] += it->second[t];
  }
  return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
}

}  // namespace tagger_detail

// Greedy left-to-right decoding; punctuation, symbols, numbers and the
// URL/handle placeholders are tagged by rule.
inline std::vector<Token> pos_tag(const TaggerModel& model, std::vector<Token> tokens) {
  std::vector<std::string> surfaces;
  surfaces.reserve(tokens.size());
  for (const auto& t : tokens) surfaces.push_back(t.norm == kUrlToken || t.norm == kHandleToken ? t.norm : t.surface);
  const auto ctx = tagger_detail::padded_context(surfaces);
  std::string prev = "-START-", prev2 = "-START2-";
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    PosTag tag;
    if (auto r = tagger_detail::rule_tag(surfaces[i])) {
      tag = *r;
    } else {
      const auto feats = tagger_detail::features(i, surfaces, ctx, prev, prev2);
      tag = static_cast<PosTag>(tagger_detail::best_tag(model.weights, feats));
    }
    tokens[i].pos = tag;
    prev2 = std::move(prev);
    prev = std::string(to_string(tag));
  }
  return tokens;
}

// Trains an averaged perceptron. Sentence order is reshuffled every epoch
// from `seed`, so the result is a pure function of (data, epochs, seed).
inline TaggerModel train_tagger(const std::vector<TaggedSentence>& data, int epochs,
                                std::uint64_t seed) {
  if (data.empty()) throw DataError("train_tagger: empty training data");
  if (epochs < 1) throw ConfigError("train_tagger: epochs must be >= 1");

  struct Accum {
    TagWeights w{};
    TagWeights total{};
    std::array<long long, kNumPosTags> stamp{};
  };
  std::unordered_map<std::string, Accum> acc;
  long long instances = 0;

  const auto update = [&](const std::vector<std::string>& feats, std::size_t truth,
                          std::size_t guess) {
    for (const auto& f : feats) {
      Accum& a = acc[f];
      for (std::size_t t : {truth, guess}) {
        a.total[t] += static_cast<double>(instances - a.stamp[t]) * a.w[t];
        a.stamp[t] = instances;
      }
      a.w[truth] += 1.0;
      a.w[guess] -= 1.0;
    }
  };

  // Greedy decoding during training reads the live weights.
  const auto live_best = [&](const std::vector<std::string>& feats) {
    TagWeights scores{};
    for (const auto& f : feats) {
      const auto it = acc.find(f);
      if (it == acc.end()) continue;
      for (std::size_t t = 0; t < kNumPosTags; ++t) scores[t] += it->second.w[t];
    }
    return static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
  };

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t si : order) {
      const auto& sent = data[si];
      std::vector<std::string> surfaces;
      surfaces.reserve(sent.size());
      for (const auto& tt : sent) surfaces.push_back(tt.surface);
      const auto ctx = tagger_detail::padded_context(surfaces);
      std::string prev = "-START-", prev2 = "-START2-";
      for (std::size_t i = 0; i < sent.size(); ++i) {
        std::size_t guess;
        if (auto r = tagger_detail::rule_tag(surfaces[i])) {
          guess = index_of(*r);
        } else {
          const auto feats = tagger_detail::features(i, surfaces, ctx, prev, prev2);
          guess = live_best(feats);
          ++instances;
          const std::size_t truth = index_of(sent[i].tag);
          if (guess != truth) update(feats, truth, guess);
        }
        prev2 = std::move(prev);
        prev = std::string(kPosTagNames[guess]);
      }
    }
  }

  TaggerModel model;
  for (auto& [feat, a] : acc) {
    TagWeights avg{};
    bool nonzero = false;
    for (std::size_t t = 0; t < kNumPosTags; ++t) {
      const double total = a.total[t] + static_cast<double>(instances - a.stamp[t]) * a.w[t];
      avg[t] = instances > 0 ? total / static_cast<double>(instances) : 0.0;
      if (avg[t] != 0.0) nonzero = true;
    }
    if (nonzero) model.weights.emplace(feat, avg);
  }
  return model;
}

// Tagged corpus: "surface<TAB>TAG" per line, blank line between sentences.
// One "surface<TAB>TAG" line per token, blank lines between sentences; lines
// starting with '#' and holding no tab are comments.
inline std::vector<TaggedSentence> read_tagged_corpus(std::istream& in) {
  std::vector<TaggedSentence> out;
  TaggedSentence cur;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos && line.front() == '#') continue;  // comment
    if (tab == std::string::npos) {
      throw DataError("tagged corpus line " + std::to_string(lineno) + ": expected surface<TAB>TAG");
    }
    const std::string tag_str(trim(std::string_view(line).substr(tab + 1)));
    const auto tag = parse_pos_tag(tag_str);
    if (!tag) {
      throw DataError("tagged corpus line " + std::to_string(lineno) + ": unknown tag '" + tag_str + "'");
    }
    cur.push_back({line.substr(0, tab), *tag});
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

inline std::vector<TaggedSentence> read_tagged_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tagged corpus: " + path);
  return read_tagged_corpus(in);
}

// Model text format:
//   podstyle-tagger 1
//   version <string>
//   tags ADJ ADP ... X
//   features <count>
//   <feature><TAB><TAG><TAB><weight>     (nonzero weights, sorted)
inline void write_tagger_model(const TaggerModel& model, std::ostream& out) {
  out << "podstyle-tagger 1\n";
  out << "version " << model.version << "\n";
  out << "tags";
  for (auto name : kPosTagNames) out << ' ' << name;
  out << "\n";
  std::vector<const std::pair<const std::string, TagWeights>*> rows;
  rows.reserve(model.weights.size());
  for (const auto& kv : model.weights) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](auto* a, auto* b) { return a->first < b->first; });
  out << "features " << rows.size() << "\n";
  for (const auto* kv : rows) {
    for (std::size_t t = 0; t < kNumPosTags; ++t) {
      if (kv->second[t] == 0.0) continue;
      out << kv->first << '\t' << kPosTagNames[t] << '\t' << format_double(kv->second[t]) << '\n';
    }
  }
}

inline TaggerModel read_tagger_model(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  const auto fail = [&](const std::string& why) {
    throw DataError("tagger model line " + std::to_string(lineno) + ": " + why);
  };
  const auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty() && line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line() || line != "podstyle-tagger 1") fail("bad header");
  TaggerModel model;
  if (!next_line() || !line.starts_with("version ")) fail("missing version");
  model.version = line.substr(8);
  if (!next_line() || !line.starts_with("tags")) fail("missing tag set");
  {
    std::istringstream ss(line.substr(4));
    std::string name;
    std::size_t i = 0;
    while (ss >> name) {
      if (i >= kNumPosTags || kPosTagNames[i] != name) fail("unexpected tag set");
      ++i;
    }
    if (i != kNumPosTags) fail("unexpected tag set");
  }
  if (!next_line() || !line.starts_with("features ")) fail("missing feature count");
  const auto expected = static_cast<std::size_t>(parse_int(line.substr(9)));
  while (next_line()) {
    const auto parts = split(line, '\t');
    if (parts.size() != 3) fail("expected feature<TAB>tag<TAB>weight");
    const auto tag = parse_pos_tag(parts[1]);
    if (!tag) fail("unknown tag '" + parts[1] + "'");
    const double w = parse_double(parts[2]);
    if (!std::isfinite(w)) fail("non-finite weight");
    model.weights[parts[0]][index_of(*tag)] = w;
  }
  if (model.weights.size() != expected) fail("feature count mismatch");
  return model;
}

inline TaggerModel load_tagger_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tagger model: " + path);
  return read_tagger_model(in);
}

inline void save_tagger_model(const TaggerModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write tagger model: " + path);
  write_tagger_model(model, out);
}

inline double tagging_accuracy(const TaggerModel& model, const std::vector<TaggedSentence>& data) {
  std::size_t right = 0, total = 0;
  for (const auto& sent : data) {
    std::vector<Token> toks;
    for (const auto& tt : sent) {
      Token t;
      t.surface = tt.surface;
      detail::fold_keep_placeholders(t.surface, t.norm);
      toks.push_back(std::move(t));
    }
    const auto tagged = pos_tag(model, std::move(toks));
    for (std::size_t i = 0; i < sent.size(); ++i) {
      ++total;
      if (tagged[i].pos == sent[i].tag) ++right;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(right) / static_cast<double>(total);
}

}  // namespace podstyle

// Acceptance runner: one PASS/FAIL line per criterion.
//
//   podstyle_acceptance [--work-dir DIR] [--only N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "podstyle/podstyle.hpp"

using namespace podstyle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> words(std::string_view text) { return word_norms(tokenize_sentences(text)); }

// ---------------------------------------------------------------------------

Outcome readability() {
  const auto& fixture = oracle::readability_fixture();
  const auto sents = tokenize_sentences(oracle::readability_text());
  const auto easy = load_easy_words(oracle::data_path("easy_words.txt"));
  const double fk = flesch_kincaid(sents), fk_hand = oracle::hand_flesch_kincaid(fixture);
  const double dc = dale_chall(sents, easy), dc_hand = oracle::hand_dale_chall(fixture);
  int agree = 0;
  for (const auto& e : oracle::kSyllables) agree += count_syllables(e.word) == e.syllables;
  std::size_t hand_syl = 0;
  for (const auto& s : fixture) {
    for (const auto& w : s.words) hand_syl += static_cast<std::size_t>(w.syllables);
  }
  const auto c = readability_counts(sents);
  Outcome o;
  o.pass = sents.size() == 10 && std::abs(fk - fk_hand) <= 1e-9 && std::abs(dc - dc_hand) <= 1e-9 && agree >= 90;
  o.detail = "|FK-hand|=" + fmt("%.3g", std::abs(fk - fk_hand)) + " (syllables " + std::to_string(c.syllables) +
             " vs hand " + std::to_string(hand_syl) + "), |DC-hand|=" + fmt("%.3g", std::abs(dc - dc_hand)) +
             ", syllable agreement " + std::to_string(agree) + "/100";
  return o;
}

Outcome distinctiveness_check() {
  std::mt19937_64 gen(2024);
  // Zipf-like vocabulary of 3000 types.
  std::vector<double> weights;
  for (int r = 1; r <= 3000; ++r) weights.push_back(1.0 / r);
  std::discrete_distribution<int> zipf(weights.begin(), weights.end());
  const auto draw_text = [&](std::size_t n) {
    std::vector<std::string> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back("w" + std::to_string(zipf(gen)));
    return t;
  };
  std::vector<std::vector<std::string>> training;
  for (int d = 0; d < 50; ++d) training.push_back(draw_text(1000));
  const auto lm = build_unigram_lm(training, 1.0);

  double worst = 0.0;
  bool reproducible = true;
  for (int i = 0; i < 20; ++i) {
    const auto text = draw_text(1000);
    const double exact = oracle::exhaustive_cross_entropy(text, training, 1.0);
    for (std::size_t n : {500u, 1000u}) {
      const auto seed = static_cast<std::uint64_t>(i * 7 + n);
      const double est = distinctiveness(text, lm, n, 5, seed);
      worst = std::max(worst, std::abs(est - exact));
      reproducible &= est == distinctiveness(text, lm, n, 5, seed);
    }
  }
  bool zero_var = true;
  const auto short_text = draw_text(80);
  const double first = distinctiveness(short_text, lm, 100, 5, 1);
  for (std::uint64_t s = 2; s < 50; ++s) zero_var &= distinctiveness(short_text, lm, 100, 5, s) == first;
  zero_var &= first == oracle::exhaustive_cross_entropy(short_text, training, 1.0) ||
              std::abs(first - oracle::exhaustive_cross_entropy(short_text, training, 1.0)) < 1e-12;

  Outcome o;
  o.pass = worst <= 0.2 && zero_var && reproducible;
  o.detail = "max |sampled-exhaustive|=" + fmt("%.4f", worst) + " bits over 20 texts x n in {500,1000}, zero variance " +
             (zero_var ? "yes" : "no") + ", reproducible " + (reproducible ? "yes" : "no");
  return o;
}

Outcome faithfulness_check() {
  const std::vector<std::vector<std::string>> docs = {words("the big game was a great game for the team"),
                                                      words("the team talks about the big trade"),
                                                      words("tomatoes and basil in the summer garden")};
  const auto idf = build_idf(docs);
  std::set<std::string> vs;
  for (const auto& d : docs) vs.insert(d.begin(), d.end());
  const std::vector<std::string> terms(vs.begin(), vs.end());
  const auto dense = oracle::dense_tfidf(docs, terms);
  double worst = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    for (std::size_t j = 0; j < docs.size(); ++j) {
      worst = std::max(worst, std::abs(faithfulness(docs[i], docs[j], idf) - oracle::dense_cosine(dense[i], dense[j])));
    }
  }
  // Sparse n-gram pipeline against the same oracle over its own term list.
  const auto vocab = build_ngram_vocab(docs, 1);
  std::vector<std::vector<std::string>> grams;
  for (const auto& d : docs) grams.push_back(doc_ngrams(d));
  const auto expect = oracle::dense_tfidf(grams, vocab.terms);
  const auto m = tfidf_transform(docs, vocab);
  for (std::size_t r = 0; r < docs.size(); ++r) {
    const auto row = m.X.to_dense_row(r);
    for (std::size_t j = 0; j < row.size(); ++j) worst = std::max(worst, std::abs(row[j] - expect[r][j]));
  }
  const double same = faithfulness(docs[0], docs[0], idf);
  const double disjoint = faithfulness(words("apples pears plums"), words("engines wheels brakes"), idf);
  Outcome o;
  o.pass = std::abs(same - 1.0) <= 1e-12 && disjoint == 0.0 && worst <= 1e-9;
  o.detail = "identical=" + fmt("%.15f", same) + ", disjoint=" + fmt("%g", disjoint) + ", max |sparse-dense|=" +
             fmt("%.3g", worst);
  return o;
}

Outcome statistics_check() {
  const std::vector<double> a = {1, 2, 3}, b = {4, 6, 8};
  const auto w = welch_t(a, b);
  const double t_err = std::abs(w.t - (-4.0 / std::sqrt(5.0 / 3.0)));
  const double df_err = std::abs(w.df - 50.0 / 17.0);

  const int B = 10000;
  Rng rng(31);
  std::vector<double> lo(30), hi(30);
  for (auto& x : lo) x = rng.normal(0, 1);
  for (auto& x : hi) x = rng.normal(10, 1);
  const double p_sep = bootstrap_welch_p(lo, hi, B, 1);

  int above = 0;
  for (int s = 0; s < 100; ++s) {
    Rng r(1000 + static_cast<std::uint64_t>(s));
    std::vector<double> x(40), y(40);
    for (auto& v : x) v = r.normal(0, 1);
    for (auto& v : y) v = r.normal(0, 1);
    above += bootstrap_welch_p(x, y, B, static_cast<std::uint64_t>(s)) > 0.05;
  }

  bool spearman_exact = true;
  int checked = 0;
  Rng sr(5);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 3 + sr.below(6);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = static_cast<double>(sr.below(4));
      y[i] = static_cast<double>(sr.below(4));
    }
    spearman_exact &= average_ranks(x) == oracle::brute_ranks(x);
    const auto r = spearman(x, y);
    if (!r.defined) continue;
    ++checked;
    spearman_exact &= std::abs(r.rho - oracle::brute_spearman(x, y)) <= 1e-12;
  }
  Outcome o;
  o.pass = t_err <= 1e-9 && df_err <= 1e-9 && p_sep <= 2.0 / (B + 1) && above >= 90 && spearman_exact;
  o.detail = "welch |dt|=" + fmt("%.2g", t_err) + " |ddf|=" + fmt("%.2g", df_err) + ", 10-sigma p=" +
             fmt("%.3g", p_sep) + ", null p>0.05 in " + std::to_string(above) + "/100, spearman n<=8 with ties " +
             (spearman_exact ? "exact" : "MISMATCH") + " on " + std::to_string(checked) + " cases";
  return o;
}

Outcome lda_check() {
  const auto small = oracle::two_topic_corpus(40, 50, 3);
  bool conserved = true;
  int sweeps = 0;
  train_lda(small.docs, {.num_topics = 5, .iterations = 40, .min_count = 1, .seed = 5}, [&](const LdaSweepState& s) {
    ++sweeps;
    const std::size_t K = s.topic_totals.size();
    std::int64_t total = 0;
    std::vector<std::int64_t> col(K, 0);
    for (std::size_t i = 0; i < s.word_topic.size(); ++i) {
      conserved &= s.word_topic[i] >= 0;
      col[i % K] += s.word_topic[i];
      total += s.word_topic[i];
    }
    conserved &= static_cast<std::size_t>(total) == s.num_tokens;
    for (std::size_t k = 0; k < K; ++k) conserved &= col[k] == s.topic_totals[k];
  });

  const auto data = oracle::two_topic_corpus(200, 60, 21);
  const LdaParams p{.num_topics = 2, .iterations = 100, .min_count = 1, .seed = 3};
  const auto m = train_lda(data.docs, p);
  double simplex_err = 0.0;
  std::vector<int> cluster;
  for (std::size_t d = 0; d < data.docs.size(); ++d) {
    const auto dt = infer_doc_topics(m, data.docs[d], 30, d);
    simplex_err = std::max(simplex_err, std::abs(std::accumulate(dt.theta.begin(), dt.theta.end(), 0.0) - 1.0));
    for (double v : dt.theta) simplex_err = std::max(simplex_err, v < 0 ? -v : 0.0);
    cluster.push_back(static_cast<int>(std::max_element(dt.theta.begin(), dt.theta.end()) - dt.theta.begin()));
  }
  const double purity = oracle::purity(cluster, data.labels);
  const auto choice = select_topic_count(data.docs, {2, 10}, {.iterations = 60, .min_count = 1, .seed = 4});
  const auto again = train_lda(data.docs, p);
  const bool deterministic = again.word_topic == m.word_topic && again.loglik_trace == m.loglik_trace &&
                             infer_doc_topics(again, data.docs[0], 30, 0).theta == infer_doc_topics(m, data.docs[0], 30, 0).theta;
  Outcome o;
  o.pass = conserved && sweeps == 40 && simplex_err <= 1e-9 && purity >= 0.9 && choice.best == 2 && deterministic;
  o.detail = std::string("conservation ") + (conserved ? "held" : "BROKEN") + " over " + std::to_string(sweeps) +
             " sweeps, simplex err " + fmt("%.2g", simplex_err) + ", purity " + fmt("%.3f", purity) +
             ", selected K=" + std::to_string(choice.best) + ", deterministic " + (deterministic ? "yes" : "no");
  return o;
}

struct Blobs {
  DenseMatrix X;
  std::vector<int> y;
};

Blobs blobs(std::size_t n, std::size_t d, double gap, std::uint64_t seed) {
  Rng rng(seed);
  Blobs out{DenseMatrix(n, d), {}};
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    out.y.push_back(label);
    for (std::size_t j = 0; j < d; ++j) out.X.at(i, j) = rng.normal(j == 0 ? (label ? gap : -gap) : 0.0, 1.0);
  }
  return out;
}

Outcome logreg_check() {
  const auto d = blobs(60, 6, 0.8, 3);
  Rng rng(1);
  std::vector<double> w(6);
  for (auto& v : w) v = rng.normal(0, 0.5);
  const double b = 0.2, lambda = 0.5, h = 1e-5;
  double gb = 0;
  const auto g = logreg_gradient(d.X, d.y, w, b, lambda, gb);
  double diff = 0, norm = 0;
  for (std::size_t j = 0; j <= w.size(); ++j) {
    double fd;
    if (j < w.size()) {
      auto wp = w, wm = w;
      wp[j] += h;
      wm[j] -= h;
      fd = (logreg_objective(d.X, d.y, wp, b, lambda) - logreg_objective(d.X, d.y, wm, b, lambda)) / (2 * h);
    } else {
      fd = (logreg_objective(d.X, d.y, w, b + h, lambda) - logreg_objective(d.X, d.y, w, b - h, lambda)) / (2 * h);
    }
    const double an = j < w.size() ? g[j] : gb;
    diff += (an - fd) * (an - fd);
    norm += fd * fd;
  }
  const double rel = std::sqrt(diff / norm);

  const auto sep = blobs(300, 5, 3.0, 9);
  const double acc = cross_validate(sep.X, sep.y, stratified_folds(sep.y, 5, 3), {}).mean_accuracy;

  const auto noisy = blobs(300, 5, 2.0, 11);
  double sum = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    auto y = noisy.y;
    Rng r(500 + static_cast<std::uint64_t>(s));
    r.shuffle(y);
    sum += cross_validate(noisy.X, y, stratified_folds(y, 5, static_cast<std::uint64_t>(s)), {}).mean_accuracy;
  }
  const double chance = sum / seeds;
  Outcome o;
  o.pass = rel <= 1e-5 && acc >= 0.95 && std::abs(chance - 0.5) <= 0.05;
  o.detail = "gradient rel err " + fmt("%.2g", rel) + ", separable CV " + fmt("%.3f", acc) +
             ", shuffled mean over 20 seeds " + fmt("%.3f", chance);
  return o;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open " + p.string());
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    rows.push_back(parse_csv_line(line));
  }
  return rows;
}

void write_study_config(const fs::path& dir) {
  const fs::path data = PODSTYLE_DATA_DIR;
  fs::create_directories(dir);
  const auto easy = load_easy_words((data / "easy_words.txt").string());
  synth::SynthConfig sc;
  sc.num_shows = 2000;
  sc.seed = 7;
  const auto corpus = synth::generate_corpus(sc, easy);
  {
    std::ofstream o(dir / "corpus.jsonl");
    write_corpus(corpus.corpus, o);
  }
  {
    std::ofstream o(dir / "topic_seeds.tsv");
    for (const auto& [role, ws] : synth::topic_seeds()) {
      std::vector<std::string> sorted(ws.begin(), ws.end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto& w : sorted) o << kTopicRoleNames[static_cast<std::size_t>(role)] << '\t' << w << '\n';
    }
  }
  const nlohmann::json cfg = {
      {"seed", 7},
      {"paths",
       {{"corpus", "corpus.jsonl"},
        {"output_dir", "out"},
        {"easy_words", (data / "easy_words.txt").string()},
        {"emotion_lexicon", (data / "lexicon/emotion_demo.tsv").string()},
        {"stopwords", (data / "stopwords.txt").string()},
        {"tagger_model", (data / "tagger/podstyle-ap.model").string()},
        {"langid_dir", (data / "langid").string()},
        {"topic_seeds", "topic_seeds.tsv"}}},
      {"lda", {{"num_topics", 10}, {"iterations", 150}, {"min_count", 5}}},
  };
  std::ofstream(dir / "config.json") << cfg.dump(2) << '\n';
}

Outcome synthetic_study(const fs::path& work) {
  const auto dir = work / "study";
  fs::remove_all(dir);
  write_study_config(dir);
  const auto cfg = load_run_config(dir / "config.json", {});
  std::ostringstream log;
  run_pipeline(cfg, {"ingest", "topics", "features", "analyze", "cv", "sweep"}, log);
  const auto out = cfg.paths.output_dir;

  const std::map<std::string, std::string> shifted = {
      {"entropy_trans", "up"}, {"speech_rate_wpm", "up"}, {"swear_topic_frac", "down"}};
  std::set<std::string> linguistic;
  for (const auto& c : feature_columns()) linguistic.insert(c.name);
  std::map<std::string, int> right, wrong, flags;
  for (const auto& r : read_csv_rows(out / "group_means.csv")) {
    if (r.size() != 8 || r[7] != "true") continue;
    ++flags[r[0]];
    const auto it = shifted.find(r[0]);
    if (it != shifted.end()) (r[4] == it->second ? right : wrong)[r[0]]++;
  }
  bool shifted_ok = true;
  std::string shifted_detail;
  for (const auto& [name, dir_] : shifted) {
    shifted_ok &= right[name] >= 3 && wrong[name] == 0;
    shifted_detail += name + " " + dir_ + " " + std::to_string(right[name]) + "/4 ";
  }
  std::size_t unshifted = 0, clean = 0;
  std::string stray;
  for (const auto& name : linguistic) {
    if (shifted.count(name)) continue;
    ++unshifted;
    if (flags[name] == 0) ++clean;
    else stray += (stray.empty() ? "" : ",") + name;
  }
  const double clean_frac = static_cast<double>(clean) / static_cast<double>(unshifted);

  double cv_acc = -1;
  for (const auto& r : read_csv_rows(out / "cv.csv")) {
    if (!r.empty() && r[0] == "linguistic (all)") cv_acc = std::stod(r[1]);
  }

  std::map<std::string, std::vector<std::pair<double, double>>> sweep;
  for (const auto& r : read_csv_rows(out / "sweep.csv")) sweep[r[1]].emplace_back(std::stod(r[0]), std::stod(r[3]));
  bool monotone = !sweep.empty();
  double worst_rise = 0;
  for (auto& [rep, pts] : sweep) {
    std::sort(pts.begin(), pts.end());
    for (std::size_t i = 1; i < pts.size(); ++i) {
      worst_rise = std::max(worst_rise, (pts[i].second - pts[i - 1].second) * 100.0);
    }
  }
  monotone &= worst_rise <= 1.0;

  Outcome o;
  o.pass = shifted_ok && clean_frac >= 0.9 && cv_acc >= 0.65 && monotone;
  o.detail = "shifted: " + shifted_detail + "; unshifted clean " + std::to_string(clean) + "/" +
             std::to_string(unshifted) + " (" + fmt("%.1f", 100 * clean_frac) + "%, flagged: " + stray +
             "); linguistic CV " + fmt("%.1f", 100 * cv_acc) + "%; max sweep rise " + fmt("%.2f", worst_rise) +
             " points";
  return o;
}

Outcome determinism(const fs::path& work) {
  const fs::path fixture = PODSTYLE_FIXTURE_DIR;
  std::map<std::string, std::string> digests[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = work / ("determinism_" + std::to_string(i));
    fs::remove_all(out);
    const auto cfg = load_run_config(fixture / "config.json", {{"paths.output_dir", out.string()}});
    std::ostringstream log;
    run_pipeline(cfg, {stage_names().begin(), stage_names().end()}, log);
    const auto manifest = nlohmann::json::parse(read_file(out / "manifest.json"));
    for (const auto& [stage, entry] : manifest.at("stages").items()) {
      for (const auto& [name, sha] : entry.at("artifacts").items()) {
        digests[i][name] = sha.get<std::string>();
        if (sha256_file(out / name) != digests[i][name]) digests[i][name] = "stale:" + name;
      }
    }
    digests[i]["manifest.json"] = sha256_file(out / "manifest.json");
  }
  std::size_t differing = 0;
  for (const auto& [name, sha] : digests[0]) differing += digests[1][name] != sha;
  Outcome o;
  o.pass = differing == 0 && digests[0].size() == digests[1].size() && digests[0].size() > 1;
  o.detail = std::to_string(digests[0].size()) + " artifacts compared, " + std::to_string(differing) + " differ";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "podstyle_acceptance";
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--work-dir" && i + 1 < argc) {
      work = argv[++i];
    } else if (a == "--only" && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else {
      std::cerr << "usage: podstyle_acceptance [--work-dir DIR] [--only N]\n";
      return 1;
    }
  }
  fs::create_directories(work);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "readability", 1, readability},
      {2, "distinctiveness", 5, distinctiveness_check},
      {3, "faithfulness/tf-idf", 1, faithfulness_check},
      {4, "statistics", 60, statistics_check},
      {5, "lda", 120, lda_check},
      {6, "logistic regression", 60, logreg_check},
      {7, "synthetic study", 600, [&] { return synthetic_study(work); }},
      {8, "determinism", 600, [&] { return determinism(work); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    if (only && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    if (!in_time) o.detail += "; over time budget";
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << "criterion " << c.id << " " << (pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
              << " [" << fmt("%.2f", secs) << " s / " << c.budget_s << " s]" << std::endl;
  }
  return failed ? 1 : 0;
}

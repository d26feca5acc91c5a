#pragma once

// Run configuration, stage implementations, versioned artifacts, and the
// manifest. Stage graph (each stage reads only artifacts of the stages it
// names):
//
//   ingest                      filtered corpus, engagement groups
//   topics   <- ingest          LDA model, topic review, doc-topic mixtures
//   features <- ingest, topics  feature table, ngram documents
//   analyze  <- features        group-mean report, Spearman check
//   cv       <- features        cross-validated accuracies, top ngrams
//   ablate   <- features        per-group ablation deltas
//   sweep    <- features        accuracy per K%
//   report   <- analyze         Markdown summary of every table present
//
// Requires OpenSSL (libcrypto) for manifest digests.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "podstyle/common.hpp"
#include "podstyle/corpus.hpp"
#include "podstyle/engagement.hpp"
#include "podstyle/features.hpp"
#include "podstyle/lexicons.hpp"
#include "podstyle/model.hpp"
#include "podstyle/stats.hpp"
#include "podstyle/table.hpp"
#include "podstyle/textkit/langid.hpp"
#include "podstyle/textkit/tagger.hpp"
#include "podstyle/topics.hpp"

namespace podstyle {

namespace fs = std::filesystem;

// Missing prerequisite artifact; a usage error.
class DependencyError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// ---------------------------------------------------------------------------
// Digests

inline std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw InvariantError("sha256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string sha256_file(const fs::path& p) { return sha256_hex(read_file(p)); }

// ---------------------------------------------------------------------------
// Configuration

inline nlohmann::json default_config_json() {
  return {
      {"seed", 1},
      {"paths",
       {{"corpus", ""},
        {"output_dir", "out"},
        {"easy_words", "data/easy_words.txt"},
        {"emotion_lexicon", "data/lexicon/emotion_demo.tsv"},
        {"stopwords", "data/stopwords.txt"},
        {"tagger_model", "data/tagger/podstyle-ap.model"},
        {"langid_dir", "data/langid"},
        {"topic_seeds", ""},
        {"topic_review", ""},
        {"sentence_scores", ""},
        {"extraneous_labels", ""}}},
      {"filter", {{"min_duration_s", 600.0}, {"min_streams", 10}, {"truncate_s", 600.0}, {"language", "en"}}},
      {"lda",
       {{"num_topics", 100},
        {"alpha", -1.0},
        {"beta", 0.01},
        {"iterations", 1000},
        {"min_count", 5},
        {"infer_iterations", 50},
        {"coherence_grid", nlohmann::json::array()},
        {"coherence_top_n", 10}}},
      {"features",
       {{"desc_sample_n", 100},
        {"trans_sample_n", 1000},
        {"sample_runs", 5},
        {"polarity_threshold", 0.5},
        {"speech_rate_full_episode", false},
        {"lm_k", 1.0}}},
      {"stats",
       {{"alpha", 0.05}, {"m_linguistic", 30}, {"m_lda", 100}, {"bootstrap_b", 10000}, {"k_percent", 25.0}}},
      {"model",
       {{"lambda", 1.0},
        {"max_iter", 1000},
        {"tol", 1e-6},
        {"folds", 5},
        {"k_percent", 25.0},
        {"k_sweep", {10, 15, 20, 25, 50}},
        {"min_df", 2},
        {"top_ngrams", 200}}},
  };
}

struct RunPaths {
  fs::path corpus, output_dir, easy_words, emotion_lexicon, stopwords, tagger_model, langid_dir;
  std::optional<fs::path> topic_seeds, topic_review, sentence_scores, extraneous_labels;
};

struct RunConfig {
  nlohmann::json raw = default_config_json();
  fs::path base_dir = ".";
  RunPaths paths;
  FilterConfig filter;
  LdaParams lda;
  int infer_iterations = 50;
  std::vector<int> coherence_grid;
  std::size_t coherence_top_n = 10;
  FeatureConfig features;
  double lm_k = 1.0;
  StatConfig stats;
  double stats_k_percent = 25.0;
  LogRegParams logreg;
  int folds = 5;
  double model_k_percent = 25.0;
  std::vector<double> k_sweep;
  std::size_t min_df = 2;
  std::size_t top_ngrams = 200;
  std::uint64_t seed = 1;
};

namespace pipeline_detail {

inline void merge(nlohmann::json& base, const nlohmann::json& over, const std::string& prefix) {
  if (!over.is_object()) throw ConfigError("config: '" + prefix + "' must be an object");
  for (auto it = over.begin(); it != over.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!base.contains(it.key())) throw ConfigError("config: unknown key '" + key + "'");
    auto& slot = base[it.key()];
    if (slot.is_object()) {
      merge(slot, it.value(), key);
    } else {
      slot = it.value();
    }
  }
}

template <typename T>
T get(const nlohmann::json& j, const char* section, const char* key) {
  const auto& v = section ? j.at(section).at(key) : j.at(key);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: '") + (section ? std::string(section) + "." : "") + key +
                      "' has the wrong type");
  }
}

}  // namespace pipeline_detail

// Sets a dotted key ("lda.num_topics") from command-line text; the value is
// parsed according to the type of the current value.
inline void apply_override(nlohmann::json& cfg, std::string_view dotted, std::string_view text) {
  nlohmann::json* node = &cfg;
  for (const auto& part : split(dotted, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError("unknown config key '" + std::string(dotted) + "'");
    }
    node = &(*node)[part];
  }
  const std::string s(text);
  try {
    if (node->is_object()) {
      throw ConfigError("config key '" + std::string(dotted) + "' is a section, not a scalar");
    } else if (node->is_boolean()) {
      if (s == "true" || s == "1") *node = true;
      else if (s == "false" || s == "0") *node = false;
      else throw ConfigError("config key '" + std::string(dotted) + "' expects true or false");
    } else if (node->is_number_integer() || node->is_number_unsigned()) {
      *node = parse_int(s);
    } else if (node->is_number()) {
      *node = parse_double(s);
    } else if (node->is_array()) {
      *node = nlohmann::json::parse(s);
      if (!node->is_array()) throw ConfigError("config key '" + std::string(dotted) + "' expects a JSON array");
    } else {
      *node = s;
    }
  } catch (const DataError& e) {
    throw ConfigError("config key '" + std::string(dotted) + "': " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + std::string(dotted) + "': " + e.what());
  }
}

inline RunConfig make_run_config(const nlohmann::json& user, const fs::path& base_dir) {
  namespace d = pipeline_detail;
  RunConfig c;
  c.raw = default_config_json();
  d::merge(c.raw, user, "");
  c.base_dir = base_dir;
  const auto& j = c.raw;

  const auto path = [&](const char* key) -> fs::path {
    const auto s = d::get<std::string>(j, "paths", key);
    if (s.empty()) return {};
    const fs::path p(s);
    return p.is_absolute() ? p : base_dir / p;
  };
  const auto opt_path = [&](const char* key) -> std::optional<fs::path> {
    auto p = path(key);
    if (p.empty()) return std::nullopt;
    return p;
  };
  c.paths.corpus = path("corpus");
  c.paths.output_dir = path("output_dir");
  c.paths.easy_words = path("easy_words");
  c.paths.emotion_lexicon = path("emotion_lexicon");
  c.paths.stopwords = path("stopwords");
  c.paths.tagger_model = path("tagger_model");
  c.paths.langid_dir = path("langid_dir");
  c.paths.topic_seeds = opt_path("topic_seeds");
  c.paths.topic_review = opt_path("topic_review");
  c.paths.sentence_scores = opt_path("sentence_scores");
  c.paths.extraneous_labels = opt_path("extraneous_labels");
  if (c.paths.output_dir.empty()) throw ConfigError("config: paths.output_dir must be set");

  const auto seed = d::get<long long>(j, nullptr, "seed");
  if (seed < 0) throw ConfigError("config: seed must be >= 0");
  c.seed = static_cast<std::uint64_t>(seed);

  c.filter.min_duration_s = d::get<double>(j, "filter", "min_duration_s");
  const auto min_streams = d::get<long long>(j, "filter", "min_streams");
  if (min_streams < 1) throw ConfigError("config: filter.min_streams must be >= 1");
  c.filter.min_streams = static_cast<std::uint64_t>(min_streams);
  c.filter.truncate_s = d::get<double>(j, "filter", "truncate_s");
  c.filter.language = d::get<std::string>(j, "filter", "language");
  if (!(c.filter.min_duration_s > 0.0) || !(c.filter.truncate_s > 0.0)) {
    throw ConfigError("config: filter durations must be > 0");
  }

  c.lda.num_topics = d::get<int>(j, "lda", "num_topics");
  c.lda.alpha = d::get<double>(j, "lda", "alpha");
  c.lda.beta = d::get<double>(j, "lda", "beta");
  c.lda.iterations = d::get<int>(j, "lda", "iterations");
  c.lda.min_count = d::get<std::size_t>(j, "lda", "min_count");
  c.lda.seed = derive_seed(c.seed, "lda");
  c.infer_iterations = d::get<int>(j, "lda", "infer_iterations");
  c.coherence_grid = d::get<std::vector<int>>(j, "lda", "coherence_grid");
  c.coherence_top_n = d::get<std::size_t>(j, "lda", "coherence_top_n");
  if (c.lda.num_topics < 1 || c.lda.iterations < 1 || c.infer_iterations < 1 || !(c.lda.beta > 0.0)) {
    throw ConfigError("config: invalid lda parameters");
  }

  c.features.desc_sample_n = d::get<std::size_t>(j, "features", "desc_sample_n");
  c.features.trans_sample_n = d::get<std::size_t>(j, "features", "trans_sample_n");
  c.features.sample_runs = d::get<int>(j, "features", "sample_runs");
  c.features.polarity_threshold = d::get<double>(j, "features", "polarity_threshold");
  c.features.speech_rate_full_episode = d::get<bool>(j, "features", "speech_rate_full_episode");
  c.features.truncate_s = c.filter.truncate_s;
  c.features.seed = derive_seed(c.seed, "features");
  c.lm_k = d::get<double>(j, "features", "lm_k");
  if (c.features.sample_runs < 1 || c.features.desc_sample_n < 1 || c.features.trans_sample_n < 1 ||
      !(c.lm_k > 0.0)) {
    throw ConfigError("config: invalid feature parameters");
  }

  c.stats.alpha = d::get<double>(j, "stats", "alpha");
  c.stats.m_linguistic = d::get<int>(j, "stats", "m_linguistic");
  c.stats.m_lda = d::get<int>(j, "stats", "m_lda");
  c.stats.bootstrap_b = d::get<int>(j, "stats", "bootstrap_b");
  c.stats.seed = derive_seed(c.seed, "stats");
  c.stats.validate();
  c.stats_k_percent = d::get<double>(j, "stats", "k_percent");

  c.logreg.lambda = d::get<double>(j, "model", "lambda");
  c.logreg.max_iter = d::get<int>(j, "model", "max_iter");
  c.logreg.tol = d::get<double>(j, "model", "tol");
  c.folds = d::get<int>(j, "model", "folds");
  c.model_k_percent = d::get<double>(j, "model", "k_percent");
  c.k_sweep = d::get<std::vector<double>>(j, "model", "k_sweep");
  c.min_df = d::get<std::size_t>(j, "model", "min_df");
  c.top_ngrams = d::get<std::size_t>(j, "model", "top_ngrams");
  if (!(c.logreg.lambda >= 0.0) || c.logreg.max_iter < 1 || !(c.logreg.tol > 0.0) || c.folds < 2 ||
      c.min_df < 1) {
    throw ConfigError("config: invalid model parameters");
  }
  for (double k : c.k_sweep) {
    if (!(k > 0.0 && k <= 50.0)) throw ConfigError("config: model.k_sweep values must be in (0, 50]");
  }
  return c;
}

// Loads a JSON config (relative paths resolve against its directory) and
// applies "dotted.key=value" overrides.
inline RunConfig load_run_config(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& overrides) {
  nlohmann::json user = nlohmann::json::object();
  fs::path base = fs::current_path();
  if (!path.empty()) {
    try {
      user = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config " + path.string() + ": " + e.what());
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
    base = fs::absolute(path).parent_path();
  }
  nlohmann::json merged = default_config_json();
  pipeline_detail::merge(merged, user, "");
  for (const auto& [k, v] : overrides) apply_override(merged, k, v);
  return make_run_config(merged, base);
}

// SHA-256 of the canonical config JSON without paths.output_dir, so runs
// that differ only in where they write share a digest.
inline std::string config_digest(const RunConfig& c) {
  auto j = c.raw;
  j["paths"].erase("output_dir");
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Artifacts and manifest

class ArtifactStore {
 public:
  explicit ArtifactStore(const RunConfig& cfg)
      : dir_(cfg.paths.output_dir), digest_(config_digest(cfg)), seed_(cfg.seed) {}

  const fs::path& dir() const { return dir_; }

  std::string header_text() const {
    return "podstyle " + std::string(kVersion) + " config=" + digest_ + " seed=" + std::to_string(seed_);
  }

  fs::path path(std::string_view name) const { return dir_ / std::string(name); }

  bool exists(std::string_view name) const { return fs::exists(path(name)); }

  // Writes `name` with the header comment for its file type and records its digest.
  void write(std::string_view name, const std::function<void(std::ostream&)>& body) {
    std::ostringstream ss;
    const std::string n(name);
    if (n.ends_with(".md")) {
      ss << "<!-- " << header_text() << " -->\n";
    } else {
      ss << "# " << header_text() << "\n";
    }
    body(ss);
    fs::create_directories(dir_);
    const std::string data = ss.str();
    std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path(name).string());
    out << data;
    written_.emplace_back(n, sha256_hex(data));
  }

  std::vector<std::pair<std::string, std::string>> take_written() { return std::exchange(written_, {}); }

 private:
  fs::path dir_;
  std::string digest_;
  std::uint64_t seed_;
  std::vector<std::pair<std::string, std::string>> written_;
};

inline constexpr std::string_view kManifestName = "manifest.json";

// Records the stage's artifacts and the digests of the inputs it read.
inline void update_manifest(const RunConfig& cfg, const ArtifactStore& store, const std::string& stage,
                            const std::vector<std::pair<std::string, std::string>>& artifacts,
                            const std::vector<std::pair<std::string, fs::path>>& inputs) {
  const auto mpath = store.path(kManifestName);
  nlohmann::json m = nlohmann::json::object();
  if (fs::exists(mpath)) {
    try {
      m = nlohmann::json::parse(read_file(mpath));
    } catch (const nlohmann::json::exception&) {
      m = nlohmann::json::object();
    }
  }
  m["_header"] = store.header_text();
  m["tool"] = "podstyle";
  m["version"] = std::string(kVersion);
  m["config_digest"] = config_digest(cfg);
  m["seed"] = cfg.seed;
  m["config"] = [&] {
    auto j = cfg.raw;
    j["paths"].erase("output_dir");
    return j;
  }();
  for (const auto& [name, p] : inputs) {
    m["inputs"][name] = {{"path", p.lexically_relative(cfg.base_dir).generic_string()}, {"sha256", sha256_file(p)}};
  }
  auto& s = m["stages"][stage];
  s = nlohmann::json::object();
  for (const auto& [name, digest] : artifacts) s["artifacts"][name] = digest;
  std::ofstream out(mpath, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + mpath.string());
  out << m.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Stage graph

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> s = {"ingest", "topics", "features", "analyze",
                                             "cv",     "ablate", "sweep",    "report"};
  return s;
}

inline const std::map<std::string, std::vector<std::string>>& stage_outputs() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"ingest", {"corpus.filtered.jsonl", "engagement.csv"}},
      {"topics", {"lda.model", "topic_review.tsv", "doc_topics.csv", "coherence.csv"}},
      {"features", {"features.csv", "docs.tsv"}},
      {"analyze", {"group_means.csv", "group_means.md", "spearman.csv"}},
      {"cv", {"cv.csv", "cv.md", "top_ngrams.csv", "ngram_logreg.model"}},
      {"ablate", {"ablation.csv", "ablation.md"}},
      {"sweep", {"sweep.csv", "sweep.md"}},
      {"report", {"report.md"}},
  };
  return m;
}

inline const std::map<std::string, std::vector<std::string>>& stage_dependencies() {
  static const std::map<std::string, std::vector<std::string>> m = {
      {"ingest", {}},
      {"topics", {"ingest"}},
      {"features", {"ingest", "topics"}},
      {"analyze", {"ingest", "features"}},
      {"cv", {"ingest", "features"}},
      {"ablate", {"ingest", "features"}},
      {"sweep", {"ingest", "features"}},
      {"report", {"analyze"}},
  };
  return m;
}

inline void require_stage(const ArtifactStore& store, const std::string& stage, const std::string& needed_by) {
  for (const auto& name : stage_outputs().at(stage)) {
    if (!store.exists(name)) {
      throw DependencyError("stage '" + needed_by + "' requires stage '" + stage + "' to run first (missing " +
                            store.path(name).string() + ")");
    }
  }
}

inline void require_dependencies(const ArtifactStore& store, const std::string& stage) {
  for (const auto& dep : stage_dependencies().at(stage)) require_stage(store, dep, stage);
}

// ---------------------------------------------------------------------------
// Resources

inline void require_file(const fs::path& p, std::string_view what) {
  if (p.empty()) throw ConfigError(std::string(what) + " path is not set");
  if (!fs::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
}

inline LanguageProfiles load_language_profiles(const fs::path& dir) {
  require_file(dir, "language profile directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".profile") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no *.profile files in " + dir.string());
  LanguageProfiles out;
  for (const auto& f : files) out.push_back(load_language_profile(f.string()));
  return out;
}

// Seed file: "role<TAB>word" per line.
inline std::map<TopicRole, std::unordered_set<std::string>> load_topic_seeds(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open topic seeds: " + p.string());
  std::map<TopicRole, std::unordered_set<std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty() || line.front() == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2) throw DataError("topic seeds line " + std::to_string(lineno) + ": expected role<TAB>word");
    bool found = false;
    for (std::size_t r = 0; r < kTopicRoleNames.size(); ++r) {
      if (kTopicRoleNames[r] == trim(cols[0])) {
        out[static_cast<TopicRole>(r)].insert(utf8::fold(trim(cols[1])));
        found = true;
      }
    }
    if (!found) throw DataError("topic seeds line " + std::to_string(lineno) + ": unknown role");
  }
  return out;
}

// ---------------------------------------------------------------------------
// In-memory stage cores

inline LanguageDetector make_language_detector(const LanguageProfiles& profiles) {
  return [&profiles](std::string_view text) { return detect_language(text, profiles).language; };
}

inline std::vector<EngagementRecord> engagement_groups(const Corpus& corpus, double k_percent) {
  return build_groups(assign_quartiles(engagement_records(corpus)), GroupSpec{k_percent, true});
}

inline TokenDoc topic_doc(const Episode& e, double truncate_s, const std::unordered_set<std::string>& stopwords) {
  const auto t = truncate_transcript(e, truncate_s);
  return lda_tokens(word_norms(tokenize_sentences(transcript_text(t))), stopwords);
}

struct TopicsResult {
  LdaModel model;
  std::vector<DocTopics> doc_topics;  // corpus order
  SpecialTopicMap roles;
  std::vector<std::pair<int, double>> coherence;  // (K, UMass); one entry when no grid
};

inline TopicsResult run_topics(const Corpus& corpus, const RunConfig& cfg,
                               const std::unordered_set<std::string>& stopwords,
                               const std::optional<std::map<TopicRole, std::unordered_set<std::string>>>& seeds,
                               const std::optional<SpecialTopicMap>& review) {
  std::vector<TokenDoc> docs;
  docs.reserve(corpus.episodes.size());
  for (const auto& e : corpus.episodes) docs.push_back(topic_doc(e, cfg.filter.truncate_s, stopwords));
  TopicsResult r;
  auto params = cfg.lda;
  if (!cfg.coherence_grid.empty()) {
    const auto choice = select_topic_count(docs, cfg.coherence_grid, params, cfg.coherence_top_n);
    params.num_topics = choice.best;
    r.coherence = choice.scores;
  }
  r.model = train_lda(docs, params);
  if (cfg.coherence_grid.empty()) {
    r.coherence.emplace_back(params.num_topics, coherence_umass(r.model, docs, cfg.coherence_top_n));
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    r.doc_topics.push_back(infer_doc_topics(r.model, docs[i], cfg.infer_iterations,
                                            derive_seed(cfg.seed, "infer", corpus.episodes[i].episode_id)));
  }
  if (review) {
    r.roles = *review;
  } else if (seeds) {
    r.roles = suggest_topic_roles(r.model, *seeds, cfg.coherence_top_n);
  }
  r.roles.validate(r.model.num_topics);
  return r;
}

inline FeatureTable lda_feature_table(const Corpus& corpus, const std::vector<DocTopics>& dt) {
  FeatureTable t;
  if (dt.size() != corpus.episodes.size()) throw InvariantError("doc-topic count mismatch");
  const std::size_t K = dt.empty() ? 0 : dt.front().theta.size();
  char name[32];
  for (std::size_t k = 0; k < K; ++k) {
    std::snprintf(name, sizeof name, "topic_%03zu", k);
    t.columns.emplace_back(name);
    t.groups.emplace_back(kLdaGroup);
  }
  for (std::size_t i = 0; i < dt.size(); ++i) {
    t.episode_ids.push_back(corpus.episodes[i].episode_id);
    t.rows.push_back(dt[i].theta);
  }
  return t;
}

struct FeatureInputs {
  const EasyWordSet* easy = nullptr;
  const EmotionLexicon* emotions = nullptr;
  const TaggerModel* tagger = nullptr;
  const SentenceScorer* scorer = nullptr;  // defaults to the lexicon scorer
  const ExtraneousClassifier* extraneous = nullptr;  // defaults to the marker heuristic
};

struct FeaturesResult {
  FeatureTable table;            // linguistic columns, corpus order
  std::vector<WordDoc> ngram_docs;  // description + transcript words per episode
};

inline FeaturesResult run_features(const Corpus& corpus, const std::vector<DocTopics>& doc_topics,
                                   const SpecialTopicMap& roles, const FeatureInputs& in, const RunConfig& cfg) {
  if (doc_topics.size() != corpus.episodes.size()) {
    throw DataError("features: topic mixtures cover " + std::to_string(doc_topics.size()) + " of " +
                    std::to_string(corpus.episodes.size()) + " episodes");
  }
  const MarkerClassifier markers;
  const ExtraneousClassifier& extraneous = in.extraneous ? *in.extraneous : markers;
  std::vector<EpisodeTexts> texts;
  texts.reserve(corpus.episodes.size());
  std::vector<std::vector<std::string>> lm_docs;
  for (const auto& e : corpus.episodes) {
    texts.push_back(prepare_texts(e, extraneous, cfg.filter.truncate_s));
    lm_docs.push_back(word_norms(texts.back().desc));
    lm_docs.push_back(word_norms(texts.back().trans));
  }
  const auto lm = build_unigram_lm(lm_docs, cfg.lm_k);
  const auto idf = build_idf(lm_docs);
  const LexiconSentenceScorer lexicon_scorer(*in.emotions);
  FeatureResources r;
  r.lm = &lm;
  r.idf = &idf;
  r.emotions = in.emotions;
  r.easy = in.easy;
  r.tagger = in.tagger;
  r.scorer = in.scorer ? in.scorer : &lexicon_scorer;
  r.extraneous = &extraneous;
  r.special_topics = &roles;
  r.config = cfg.features;

  FeaturesResult out;
  for (const auto& c : feature_columns()) {
    out.table.columns.push_back(c.name);
    out.table.groups.push_back(c.group);
  }
  for (std::size_t i = 0; i < corpus.episodes.size(); ++i) {
    const auto& e = corpus.episodes[i];
    const auto fv = extract_features(e, texts[i], doc_topics[i], r);
    out.table.episode_ids.push_back(e.episode_id);
    out.table.rows.push_back(fv.values);
    auto doc = lm_docs[2 * i];
    doc.insert(doc.end(), lm_docs[2 * i + 1].begin(), lm_docs[2 * i + 1].end());
    out.ngram_docs.push_back(std::move(doc));
  }
  return out;
}

// Linguistic representations compared in the classification table.
inline FeatureTable columns_for_side(const FeatureTable& t, std::string_view side) {
  const auto& cols = feature_columns();
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < t.num_cols(); ++c) {
    if (c < cols.size() && cols[c].name == t.columns[c] && cols[c].side == side) keep.push_back(c);
  }
  FeatureTable out;
  out.episode_ids = t.episode_ids;
  for (auto c : keep) {
    out.columns.push_back(t.columns[c]);
    out.groups.push_back(t.groups[c]);
  }
  for (const auto& row : t.rows) {
    std::vector<double> r;
    for (auto c : keep) r.push_back(row[c]);
    out.rows.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Representation> classification_representations(const FeatureTable& linguistic,
                                                                   const FeatureTable& lda,
                                                                   const std::vector<std::string>& ids,
                                                                   const std::vector<WordDoc>& docs,
                                                                   std::size_t min_df, bool include_sides) {
  std::vector<Representation> reps;
  if (include_sides) {
    reps.push_back(dense_representation("linguistic (description)", columns_for_side(linguistic, "desc")));
    reps.push_back(dense_representation("linguistic (transcript)", columns_for_side(linguistic, "trans")));
  }
  reps.push_back(dense_representation("linguistic (all)", linguistic));
  reps.push_back(dense_representation("lda topics", lda));
  std::unordered_map<std::string, WordDoc> by_id;
  for (std::size_t i = 0; i < ids.size(); ++i) by_id.emplace(ids[i], docs[i]);
  reps.push_back(ngram_representation("bag of ngrams", std::move(by_id), min_df));
  return reps;
}

// ---------------------------------------------------------------------------
// File-level stages

struct StageContext {
  const RunConfig& cfg;
  ArtifactStore store;
  std::ostream& log;
};

namespace pipeline_detail {

inline Corpus read_filtered(const StageContext& ctx) {
  auto c = load_corpus(ctx.store.path("corpus.filtered.jsonl").string());
  c.filtered = true;
  return c;
}

inline std::vector<EngagementRecord> read_engagement(const StageContext& ctx) {
  std::ifstream in(ctx.store.path("engagement.csv"));
  if (!in) throw DataError("cannot open engagement.csv");
  std::vector<EngagementRecord> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (trim(line).empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto cells = parse_csv_line(line);
    if (cells.size() != 5) throw DataError("engagement.csv: expected 5 cells");
    EngagementRecord r;
    r.episode_id = cells[0];
    r.stream_rate = parse_double(cells[1]);
    r.popularity = static_cast<std::uint64_t>(parse_int(cells[2]));
    r.quartile = static_cast<int>(parse_int(cells[3]));
    if (cells[4] == "high") r.group = EngagementGroup::high;
    else if (cells[4] == "low") r.group = EngagementGroup::low;
    out.push_back(std::move(r));
  }
  return out;
}

inline FeatureTable read_table(const StageContext& ctx, std::string_view name) {
  std::ifstream in(ctx.store.path(name));
  if (!in) throw DataError("cannot open " + ctx.store.path(name).string());
  return read_table_csv(in);
}

inline FeatureTable read_features(const StageContext& ctx) {
  auto t = read_table(ctx, "features.csv");
  const auto& cols = feature_columns();
  if (t.columns.size() != cols.size()) throw DataError("features.csv: unexpected column count");
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (t.columns[i] != cols[i].name) throw DataError("features.csv: unexpected column '" + t.columns[i] + "'");
    t.groups[i] = cols[i].group;
  }
  return t;
}

inline FeatureTable read_lda_table(const StageContext& ctx) {
  auto t = read_table(ctx, "doc_topics.csv");
  for (auto& g : t.groups) g = std::string(kLdaGroup);
  return t;
}

inline std::pair<std::vector<std::string>, std::vector<WordDoc>> read_docs(const StageContext& ctx) {
  std::ifstream in(ctx.store.path("docs.tsv"));
  if (!in) throw DataError("cannot open docs.tsv");
  std::vector<std::string> ids;
  std::vector<WordDoc> docs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError("docs.tsv: expected episode_id<TAB>words");
    ids.push_back(line.substr(0, tab));
    WordDoc d;
    for (auto& w : split(std::string_view(line).substr(tab + 1), ' ')) {
      if (!w.empty()) d.push_back(std::move(w));
    }
    docs.push_back(std::move(d));
  }
  return {ids, docs};
}

inline void finish(StageContext& ctx, const std::string& stage,
                   const std::vector<std::pair<std::string, fs::path>>& inputs) {
  update_manifest(ctx.cfg, ctx.store, stage, ctx.store.take_written(), inputs);
  ctx.log << "[" << stage << "] done\n";
}

}  // namespace pipeline_detail

inline void stage_ingest(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_file(cfg.paths.corpus, "corpus");
  const auto raw = load_corpus(cfg.paths.corpus.string());
  const auto profiles = load_language_profiles(cfg.paths.langid_dir);
  const auto filtered = apply_filters(raw, cfg.filter, make_language_detector(profiles));
  ctx.log << "[ingest] " << raw.episodes.size() << " episodes read, " << filtered.episodes.size()
          << " kept after filters\n";
  const auto records = engagement_groups(filtered, cfg.stats_k_percent);
  ctx.store.write("corpus.filtered.jsonl", [&](std::ostream& o) { write_corpus(filtered, o); });
  ctx.store.write("engagement.csv", [&](std::ostream& o) { write_engagement_csv(records, o); });
  std::vector<std::pair<std::string, fs::path>> inputs = {{"corpus", cfg.paths.corpus}};
  std::vector<fs::path> profile_files;
  for (const auto& e : fs::directory_iterator(cfg.paths.langid_dir)) {
    if (e.path().extension() == ".profile") profile_files.push_back(e.path());
  }
  std::sort(profile_files.begin(), profile_files.end());
  for (const auto& p : profile_files) inputs.emplace_back("langid/" + p.filename().string(), p);
  pipeline_detail::finish(ctx, "ingest", inputs);
}

inline void stage_topics(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_dependencies(ctx.store, "topics");
  require_file(cfg.paths.stopwords, "stopword list");
  const auto corpus = pipeline_detail::read_filtered(ctx);
  const auto stopwords = load_stopwords(cfg.paths.stopwords.string());
  std::optional<std::map<TopicRole, std::unordered_set<std::string>>> seeds;
  std::optional<SpecialTopicMap> review;
  std::vector<std::pair<std::string, fs::path>> inputs = {{"stopwords", cfg.paths.stopwords}};
  if (cfg.paths.topic_review) {
    require_file(*cfg.paths.topic_review, "topic review");
    review = load_topic_review(cfg.paths.topic_review->string());
    inputs.emplace_back("topic_review", *cfg.paths.topic_review);
  } else if (cfg.paths.topic_seeds) {
    require_file(*cfg.paths.topic_seeds, "topic seeds");
    seeds = load_topic_seeds(*cfg.paths.topic_seeds);
    inputs.emplace_back("topic_seeds", *cfg.paths.topic_seeds);
  }
  const auto r = run_topics(corpus, cfg, stopwords, seeds, review);
  ctx.log << "[topics] K=" << r.model.num_topics << " V=" << r.model.vocab_size() << "\n";
  ctx.store.write("lda.model", [&](std::ostream& o) { write_lda_model(r.model, o); });
  ctx.store.write("topic_review.tsv", [&](std::ostream& o) { write_topic_review(r.model, r.roles, o); });
  ctx.store.write("doc_topics.csv", [&](std::ostream& o) { write_table_csv(lda_feature_table(corpus, r.doc_topics), o); });
  ctx.store.write("coherence.csv", [&](std::ostream& o) {
    o << "num_topics,umass\n";
    for (const auto& [k, s] : r.coherence) o << k << ',' << format_double(s) << '\n';
  });
  pipeline_detail::finish(ctx, "topics", inputs);
}

inline void stage_features(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_dependencies(ctx.store, "features");
  require_file(cfg.paths.easy_words, "easy-word list");
  require_file(cfg.paths.emotion_lexicon, "emotion lexicon");
  require_file(cfg.paths.tagger_model, "tagger model");
  const auto corpus = pipeline_detail::read_filtered(ctx);
  const auto lda_table = pipeline_detail::read_lda_table(ctx);
  const auto roles = load_topic_review(ctx.store.path("topic_review.tsv").string());
  const auto idx = lda_table.row_index();
  std::vector<DocTopics> dt;
  for (const auto& e : corpus.episodes) {
    const auto it = idx.find(e.episode_id);
    if (it == idx.end()) throw DataError("doc_topics.csv: no row for episode '" + e.episode_id + "'");
    dt.push_back({lda_table.rows[it->second], false});
  }
  roles.validate(static_cast<int>(lda_table.num_cols()));

  const auto easy = load_easy_words(cfg.paths.easy_words.string());
  const auto emotions = load_emotion_lexicon(cfg.paths.emotion_lexicon.string());
  const auto tagger = load_tagger_model(cfg.paths.tagger_model.string());
  std::vector<std::pair<std::string, fs::path>> inputs = {{"easy_words", cfg.paths.easy_words},
                                                          {"emotion_lexicon", cfg.paths.emotion_lexicon},
                                                          {"tagger_model", cfg.paths.tagger_model}};
  FeatureInputs in{&easy, &emotions, &tagger, nullptr, nullptr};
  std::optional<ExternalScoreTable> scores;
  if (cfg.paths.sentence_scores) {
    require_file(*cfg.paths.sentence_scores, "sentence scores");
    std::ifstream s(*cfg.paths.sentence_scores);
    scores = read_external_scores(s);
    in.scorer = &*scores;
    inputs.emplace_back("sentence_scores", *cfg.paths.sentence_scores);
  }
  std::optional<ExternalExtraneousLabels> labels;
  if (cfg.paths.extraneous_labels) {
    require_file(*cfg.paths.extraneous_labels, "extraneous labels");
    std::ifstream s(*cfg.paths.extraneous_labels);
    labels = read_extraneous_labels(s);
    in.extraneous = &*labels;
    inputs.emplace_back("extraneous_labels", *cfg.paths.extraneous_labels);
  }
  const auto r = run_features(corpus, dt, roles, in, cfg);
  ctx.log << "[features] " << r.table.num_rows() << " episodes x " << r.table.num_cols() << " features\n";
  ctx.store.write("features.csv", [&](std::ostream& o) { write_table_csv(r.table, o); });
  ctx.store.write("docs.tsv", [&](std::ostream& o) {
    for (std::size_t i = 0; i < r.ngram_docs.size(); ++i) {
      o << r.table.episode_ids[i] << '\t';
      for (std::size_t k = 0; k < r.ngram_docs[i].size(); ++k) o << (k ? " " : "") << r.ngram_docs[i][k];
      o << '\n';
    }
  });
  pipeline_detail::finish(ctx, "features", inputs);
}

inline void write_spearman_csv(const SpearmanResult& s, std::size_t n, std::ostream& out) {
  out << "x,y,n,rho,p,defined\n";
  out << "stream_rate,popularity," << n << ',' << format_double(s.rho) << ',' << format_double(s.p) << ','
      << (s.defined ? "true" : "false") << '\n';
}

inline void stage_analyze(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_dependencies(ctx.store, "analyze");
  const auto records = pipeline_detail::read_engagement(ctx);
  auto table = pipeline_detail::read_features(ctx);
  table.append_columns(pipeline_detail::read_lda_table(ctx));
  const auto rows = group_mean_report(table, records, cfg.stats);
  std::vector<double> rate, pop;
  for (const auto& r : records) {
    rate.push_back(r.stream_rate);
    pop.push_back(static_cast<double>(r.popularity));
  }
  const auto s = spearman(rate, pop);
  std::size_t flagged = 0;
  for (const auto& r : rows) flagged += r.significant;
  ctx.log << "[analyze] " << rows.size() << " tests, " << flagged << " significant; spearman rho="
          << format_double(s.rho) << "\n";
  ctx.store.write("group_means.csv", [&](std::ostream& o) { write_report_csv(rows, o); });
  ctx.store.write("group_means.md", [&](std::ostream& o) {
    o << "Bonferroni families: linguistic m=" << cfg.stats.m_linguistic << ", LDA topics m=" << cfg.stats.m_lda
      << ", alpha=" << format_double(cfg.stats.alpha) << ", B=" << cfg.stats.bootstrap_b << ", K="
      << format_double(cfg.stats_k_percent) << "%.\n\n";
    write_report_markdown(rows, o);
  });
  ctx.store.write("spearman.csv", [&](std::ostream& o) { write_spearman_csv(s, rate.size(), o); });
  pipeline_detail::finish(ctx, "analyze", {});
}

namespace pipeline_detail {

struct ModelInputs {
  std::vector<EngagementRecord> records;
  FeatureTable linguistic;
  FeatureTable lda;
  std::vector<std::string> doc_ids;
  std::vector<WordDoc> docs;
};

inline ModelInputs read_model_inputs(const StageContext& ctx) {
  ModelInputs m;
  m.records = assign_quartiles(read_engagement(ctx));
  m.linguistic = read_features(ctx);
  m.lda = read_lda_table(ctx);
  std::tie(m.doc_ids, m.docs) = read_docs(ctx);
  return m;
}

}  // namespace pipeline_detail

inline void stage_cv(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_dependencies(ctx.store, "cv");
  const auto in = pipeline_detail::read_model_inputs(ctx);
  const auto grouped = build_groups(in.records, GroupSpec{cfg.model_k_percent, true});
  const auto set = labeled_set(grouped);
  const auto seed = fold_seed_for(cfg.seed, cfg.model_k_percent);
  const auto folds = stratified_folds(set.labels, cfg.folds, seed);
  std::vector<CvResult> results;
  for (const auto& rep : classification_representations(in.linguistic, in.lda, in.doc_ids, in.docs, cfg.min_df, true)) {
    auto r = rep.evaluate(set, folds, cfg.logreg);
    r.fold_seed = seed;
    ctx.log << "[cv] " << rep.name << ": " << percent(r.mean_accuracy) << "%\n";
    results.push_back(std::move(r));
  }
  // Full-data ngram model for the top-weighted ngram lists.
  std::unordered_map<std::string, std::size_t> doc_index;
  for (std::size_t i = 0; i < in.doc_ids.size(); ++i) doc_index.emplace(in.doc_ids[i], i);
  std::vector<WordDoc> docs;
  for (const auto& id : set.episode_ids) {
    const auto it = doc_index.find(id);
    if (it == doc_index.end()) throw DataError("docs.tsv: no document for episode '" + id + "'");
    docs.push_back(in.docs[it->second]);
  }
  const auto vocab = build_ngram_vocab(docs, cfg.min_df);
  const auto model = train_logreg(tfidf_transform(docs, vocab).X, set.labels, cfg.logreg);
  const auto top = top_weighted_ngrams(model, vocab, cfg.top_ngrams);

  ctx.store.write("cv.csv", [&](std::ostream& o) { write_cv_csv(results, o); });
  ctx.store.write("cv.md", [&](std::ostream& o) { write_cv_markdown(results, o); });
  ctx.store.write("top_ngrams.csv", [&](std::ostream& o) { write_top_ngrams_csv(top, o); });
  ctx.store.write("ngram_logreg.model", [&](std::ostream& o) { write_logreg_model(model, vocab.terms, o); });
  pipeline_detail::finish(ctx, "cv", {});
}

inline void stage_ablate(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_dependencies(ctx.store, "ablate");
  const auto in = pipeline_detail::read_model_inputs(ctx);
  const auto set = labeled_set(build_groups(in.records, GroupSpec{cfg.model_k_percent, true}));
  const auto folds = stratified_folds(set.labels, cfg.folds, fold_seed_for(cfg.seed, cfg.model_k_percent));
  const auto idx = in.linguistic.row_index();
  std::vector<std::size_t> rows;
  for (const auto& id : set.episode_ids) {
    const auto it = idx.find(id);
    if (it == idx.end()) throw DataError("features.csv: no row for episode '" + id + "'");
    rows.push_back(it->second);
  }
  const auto result = ablation(in.linguistic.select_rows(rows), set.labels, folds, cfg.logreg);
  for (const auto& r : result) {
    ctx.log << "[ablate] -" << r.group << ": " << format_double(r.delta_points) << " points\n";
  }
  ctx.store.write("ablation.csv", [&](std::ostream& o) { write_ablation_csv(result, o); });
  ctx.store.write("ablation.md", [&](std::ostream& o) { write_ablation_markdown(result, o); });
  pipeline_detail::finish(ctx, "ablate", {});
}

inline void stage_sweep(StageContext& ctx) {
  const auto& cfg = ctx.cfg;
  require_dependencies(ctx.store, "sweep");
  const auto in = pipeline_detail::read_model_inputs(ctx);
  SweepConfig sc;
  sc.k_percents = cfg.k_sweep;
  sc.folds = cfg.folds;
  sc.seed = cfg.seed;
  sc.logreg = cfg.logreg;
  const auto rows = sweep_K(in.records,
                            classification_representations(in.linguistic, in.lda, in.doc_ids, in.docs, cfg.min_df, false),
                            sc);
  for (const auto& r : rows) {
    ctx.log << "[sweep] K=" << format_double(r.k_percent) << " " << r.representation << ": "
            << percent(r.mean_accuracy) << "%\n";
  }
  ctx.store.write("sweep.csv", [&](std::ostream& o) { write_sweep_csv(rows, o); });
  ctx.store.write("sweep.md", [&](std::ostream& o) { write_sweep_markdown(rows, o); });
  pipeline_detail::finish(ctx, "sweep", {});
}

inline void stage_report(StageContext& ctx) {
  require_dependencies(ctx.store, "report");
  const auto body = [&](std::string_view name) {
    std::istringstream in(read_file(ctx.store.path(name)));
    std::string line, out;
    while (std::getline(in, line)) {
      if (line.starts_with("<!--")) continue;
      out += line + "\n";
    }
    return out;
  };
  ctx.store.write("report.md", [&](std::ostream& o) {
    o << "# Engagement study report\n\n";
    o << "## Group mean differences (high vs low stream rate, per popularity quartile)\n\n"
      << body("group_means.md") << "\n";
    {
      std::istringstream in(read_file(ctx.store.path("spearman.csv")));
      std::string line;
      std::vector<std::vector<std::string>> rows;
      while (std::getline(in, line)) {
        if (!line.empty() && line.front() != '#') rows.push_back(parse_csv_line(line));
      }
      if (rows.size() == 2 && rows[1].size() == 6) {
        o << "## Stream rate vs popularity\n\nSpearman rho = " << rows[1][3] << " (p = " << rows[1][4]
          << ", n = " << rows[1][2] << ")\n\n";
      }
    }
    if (ctx.store.exists("cv.md")) o << "## Classification accuracy\n\n" << body("cv.md") << "\n";
    if (ctx.store.exists("ablation.md")) o << "## Ablation\n\n" << body("ablation.md") << "\n";
    if (ctx.store.exists("sweep.md")) o << "## Accuracy by K%\n\n" << body("sweep.md") << "\n";
  });
  pipeline_detail::finish(ctx, "report", {});
}

inline void run_stage(StageContext& ctx, const std::string& stage) {
  if (stage == "ingest") stage_ingest(ctx);
  else if (stage == "topics") stage_topics(ctx);
  else if (stage == "features") stage_features(ctx);
  else if (stage == "analyze") stage_analyze(ctx);
  else if (stage == "cv") stage_cv(ctx);
  else if (stage == "ablate") stage_ablate(ctx);
  else if (stage == "sweep") stage_sweep(ctx);
  else if (stage == "report") stage_report(ctx);
  else throw ConfigError("unknown stage '" + stage + "'");
}

// Runs the requested stages in graph order.
inline void run_pipeline(const RunConfig& cfg, const std::set<std::string>& stages, std::ostream& log = std::cerr) {
  for (const auto& s : stages) {
    if (!stage_outputs().count(s)) throw ConfigError("unknown stage '" + s + "'");
  }
  StageContext ctx{cfg, ArtifactStore(cfg), log};
  for (const auto& s : stage_names()) {
    if (stages.count(s)) run_stage(ctx, s);
  }
}

inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 1;
  if (dynamic_cast<const DataError*>(&e)) return 2;
  return 3;
}

}  // namespace podstyle

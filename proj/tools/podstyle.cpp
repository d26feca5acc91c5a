// podstyle command-line tool.
//
// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 internal
// invariant failure. Logs go to standard error.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include "podstyle/pipeline.hpp"
#include "podstyle/synth.hpp"
#include "podstyle/textkit/langid.hpp"
#include "podstyle/textkit/tagger.hpp"

namespace {

using namespace podstyle;

struct Globals {
  std::string config;
  std::vector<std::string> sets;
};

// "--dotted.key value", "--dotted.key=value" and "--set key=value" forms.
std::vector<std::pair<std::string, std::string>> collect_overrides(const Globals& g,
                                                                   const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  for (std::size_t i = 0; i < extras.size(); ++i) {
    const auto& a = extras[i];
    if (!a.starts_with("--")) throw ConfigError("unexpected argument '" + a + "'");
    const auto body = a.substr(2);
    const auto eq = body.find('=');
    if (eq != std::string::npos) {
      out.emplace_back(body.substr(0, eq), body.substr(eq + 1));
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("missing value for '" + a + "'");
      out.emplace_back(body, extras[++i]);
    }
  }
  return out;
}

RunConfig config_from(const Globals& g, const CLI::App& sub) {
  return load_run_config(g.config, collect_overrides(g, sub.remaining()));
}

void run_stages(const Globals& g, const CLI::App& sub, std::set<std::string> stages) {
  run_pipeline(config_from(g, sub), stages);
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  body(out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"podstyle: linguistic style features and listener engagement"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration");
  app.add_option("--set", g.sets, "Config override key=value (repeatable)");

  const auto stage_cmd = [&](CLI::App* parent, const std::string& name, const std::string& desc) {
    auto* c = parent->add_subcommand(name, desc);
    c->allow_extras();
    return c;
  };

  auto* ingest = stage_cmd(&app, "ingest", "Filter the corpus and build engagement groups");
  auto* lda = app.add_subcommand("lda", "Topic model");
  lda->require_subcommand(1);
  auto* lda_train = stage_cmd(lda, "train", "Train LDA and infer per-episode topic mixtures");
  auto* lda_label = lda->add_subcommand("label", "Suggest special-topic roles from seed words");
  std::string label_model, label_seeds, label_out;
  std::size_t label_top = 10;
  double label_share = 0.5;
  lda_label->add_option("--model", label_model, "LDA model file")->required();
  lda_label->add_option("--seeds", label_seeds, "Seed words (role<TAB>word)")->required();
  lda_label->add_option("--out", label_out, "Review file to write")->required();
  lda_label->add_option("--top-n", label_top, "Top words inspected per topic");
  lda_label->add_option("--min-share", label_share, "Share of seed words needed for a role");

  auto* features = app.add_subcommand("features", "Feature extraction");
  features->require_subcommand(1);
  auto* features_extract = stage_cmd(features, "extract", "Compute the feature table");

  auto* analyze = app.add_subcommand("analyze", "Statistics");
  analyze->require_subcommand(1);
  auto* analyze_gm = stage_cmd(analyze, "group-means", "Bootstrapped Welch tests per quartile");
  auto* analyze_sp = stage_cmd(analyze, "spearman", "Spearman correlation of stream rate and popularity");

  auto* model = app.add_subcommand("model", "Classification");
  model->require_subcommand(1);
  auto* model_cv = stage_cmd(model, "cv", "Cross-validated accuracy per representation");
  auto* model_ablate = stage_cmd(model, "ablate", "Remove one feature group at a time");
  auto* model_sweep = stage_cmd(model, "sweep", "Accuracy as the group size K% varies");
  auto* model_top = stage_cmd(model, "top-ngrams", "Print the most predictive ngrams");
  std::size_t top_n = 20;
  model_top->add_option("-n", top_n, "Ngrams per side");

  auto* report = stage_cmd(&app, "report", "Assemble report.md");
  auto* run = stage_cmd(&app, "run", "Run several stages in order");
  std::string run_stages_arg = "ingest,topics,features,analyze,cv,ablate,sweep,report";
  run->add_option("--stages", run_stages_arg, "Comma-separated stage list");

  auto* synth = app.add_subcommand("synth", "Synthetic data");
  synth->require_subcommand(1);
  auto* synth_corpus = synth->add_subcommand("corpus", "Generate a synthetic episode corpus");
  synth::SynthConfig sc;
  std::string synth_out, synth_easy = "data/easy_words.txt", truth_out;
  bool no_shifts = false;
  synth_corpus->add_option("--shows", sc.num_shows, "English shows to generate");
  synth_corpus->add_option("--seed", sc.seed, "Seed");
  synth_corpus->add_option("--easy-words", synth_easy, "Dale-Chall easy-word list");
  synth_corpus->add_flag("--no-shifts", no_shifts, "Decouple all style variables from engagement");
  synth_corpus->add_option("--out", synth_out, "Corpus JSONL to write")->required();
  synth_corpus->add_option("--truth", truth_out, "Optional CSV of latent variables");
  auto* synth_tagged = synth->add_subcommand("tagged", "Generate gold-tagged sentences");
  std::size_t tagged_n = 3000;
  std::uint64_t tagged_seed = 1;
  std::string tagged_out;
  synth_tagged->add_option("--sentences", tagged_n, "Sentence count");
  synth_tagged->add_option("--seed", tagged_seed, "Seed");
  synth_tagged->add_option("--out", tagged_out, "Tagged corpus to write")->required();

  auto* synth_seeds = synth->add_subcommand("seeds", "Write the topic seed words used by the generator");
  std::string seeds_out;
  synth_seeds->add_option("--out", seeds_out, "Seed file to write")->required();

  auto* tagger = app.add_subcommand("tagger", "Part-of-speech tagger");
  tagger->require_subcommand(1);
  auto* tagger_train = tagger->add_subcommand("train", "Train the averaged perceptron");
  std::vector<std::string> train_files;
  std::string tagger_out, tagger_model_path, eval_file;
  int epochs = 8;
  std::uint64_t tagger_seed = 1;
  tagger_train->add_option("--train", train_files, "Tagged corpus files")->required();
  tagger_train->add_option("--epochs", epochs, "Training epochs");
  tagger_train->add_option("--seed", tagger_seed, "Shuffle seed");
  tagger_train->add_option("--out", tagger_out, "Model file to write")->required();
  auto* tagger_eval = tagger->add_subcommand("eval", "Token accuracy on a tagged corpus");
  tagger_eval->add_option("--model", tagger_model_path, "Model file")->required();
  tagger_eval->add_option("--data", eval_file, "Tagged corpus")->required();

  auto* langid = app.add_subcommand("langid", "Language identification");
  langid->require_subcommand(1);
  auto* langid_profile = langid->add_subcommand("profile", "Build a trigram profile from sample text");
  std::string lang_code, lang_in, lang_out, lang_dir = "data/langid", lang_text;
  langid_profile->add_option("--lang", lang_code, "Language code")->required();
  langid_profile->add_option("--in", lang_in, "Sample text file")->required();
  langid_profile->add_option("--out", lang_out, "Profile file to write")->required();
  auto* langid_detect = langid->add_subcommand("detect", "Detect the language of a text");
  langid_detect->add_option("--profiles", lang_dir, "Directory of *.profile files");
  langid_detect->add_option("text", lang_text, "Text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*ingest) run_stages(g, *ingest, {"ingest"});
    else if (*lda_train) run_stages(g, *lda_train, {"topics"});
    else if (*lda_label) {
      const auto m = load_lda_model(label_model);
      const auto roles = suggest_topic_roles(m, load_topic_seeds(label_seeds), label_top, label_share);
      write_file(label_out, [&](std::ostream& o) {
        o << "# topic<TAB>role<TAB>top words; edit the role column (ad, swear, filler or -)\n";
        write_topic_review(m, roles, o);
      });
    } else if (*features_extract) run_stages(g, *features_extract, {"features"});
    else if (*analyze_gm) run_stages(g, *analyze_gm, {"analyze"});
    else if (*analyze_sp) {
      const auto cfg = config_from(g, *analyze_sp);
      ArtifactStore store(cfg);
      require_stage(store, "ingest", "analyze spearman");
      std::ifstream in(store.path("engagement.csv"));
      std::vector<double> rate, pop;
      std::string line;
      bool header = false;
      while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
          header = true;
          continue;
        }
        const auto cells = parse_csv_line(line);
        rate.push_back(parse_double(cells.at(1)));
        pop.push_back(parse_double(cells.at(2)));
      }
      const auto s = spearman(rate, pop);
      write_spearman_csv(s, rate.size(), std::cout);
    } else if (*model_cv) run_stages(g, *model_cv, {"cv"});
    else if (*model_ablate) run_stages(g, *model_ablate, {"ablate"});
    else if (*model_sweep) run_stages(g, *model_sweep, {"sweep"});
    else if (*model_top) {
      const auto cfg = config_from(g, *model_top);
      ArtifactStore store(cfg);
      require_stage(store, "cv", "model top-ngrams");
      std::ifstream in(store.path("ngram_logreg.model"));
      std::vector<std::string> names;
      const auto m = read_logreg_model(in, &names);
      NgramVocab v;
      v.terms = names;
      v.df.assign(names.size(), 0);
      const auto top = top_weighted_ngrams(m, v, top_n);
      write_top_ngrams_csv(top, std::cout);
    } else if (*report) run_stages(g, *report, {"report"});
    else if (*run) {
      std::set<std::string> stages;
      for (const auto& s : split(run_stages_arg, ',')) {
        if (!trim(s).empty()) stages.insert(std::string(trim(s)));
      }
      run_stages(g, *run, stages);
    } else if (*synth_corpus) {
      sc.inject_shifts = !no_shifts;
      const auto easy = load_easy_words(synth_easy);
      const auto out = synth::generate_corpus(sc, easy);
      write_file(synth_out, [&](std::ostream& o) { write_corpus(out.corpus, o); });
      if (!truth_out.empty()) {
        write_file(truth_out, [&](std::ostream& o) {
          o << "episode_id,latent,representative,genre,speech_rate_wpm,pause_s,distinct_nouns,swear_rate\n";
          for (const auto& t : out.truth) {
            o << t.episode_id << ',' << format_double(t.latent) << ',' << (t.representative ? 1 : 0) << ','
              << t.genre << ',' << format_double(t.speech_rate_wpm) << ',' << format_double(t.pause_s) << ','
              << t.distinct_nouns << ',' << format_double(t.swear_rate) << '\n';
          }
        });
      }
      std::cerr << "[synth] " << out.corpus.episodes.size() << " episodes written to " << synth_out << "\n";
    } else if (*synth_tagged) {
      const auto sents = synth::tagged_sentences(tagged_n, tagged_seed);
      write_file(tagged_out, [&](std::ostream& o) {
        o << "# synthetic gold-tagged sentences (seed " << tagged_seed << ")\n";
        for (const auto& s : sents) {
          for (const auto& t : s) o << t.surface << '\t' << to_string(t.tag) << '\n';
          o << '\n';
        }
      });
    } else if (*synth_seeds) {
      write_file(seeds_out, [&](std::ostream& o) {
        o << "# role<TAB>word\n";
        for (const auto& [role, words] : synth::topic_seeds()) {
          std::vector<std::string> sorted(words.begin(), words.end());
          std::sort(sorted.begin(), sorted.end());
          for (const auto& w : sorted) o << kTopicRoleNames[static_cast<std::size_t>(role)] << '\t' << w << '\n';
        }
      });
    } else if (*tagger_train) {
      std::vector<TaggedSentence> data;
      for (const auto& f : train_files) {
        auto part = read_tagged_corpus_file(f);
        data.insert(data.end(), part.begin(), part.end());
      }
      const auto m = train_tagger(data, epochs, tagger_seed);
      save_tagger_model(m, tagger_out);
      std::cerr << "[tagger] " << data.size() << " sentences, training accuracy "
                << format_double(tagging_accuracy(m, data)) << "\n";
    } else if (*tagger_eval) {
      const auto m = load_tagger_model(tagger_model_path);
      std::cout << format_double(tagging_accuracy(m, read_tagged_corpus_file(eval_file))) << "\n";
    } else if (*langid_profile) {
      std::ifstream in(lang_in);
      if (!in) throw DataError("cannot open " + lang_in);
      std::ostringstream ss;
      ss << in.rdbuf();
      const auto p = build_language_profile(lang_code, ss.str());
      write_file(lang_out, [&](std::ostream& o) { write_language_profile(p, o); });
    } else if (*langid_detect) {
      const auto g2 = detect_language(lang_text, load_language_profiles(lang_dir));
      std::cout << g2.language << '\t' << format_double(g2.confidence) << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "podstyle: error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "podstyle: internal error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "podstyle/pipeline.hpp"

using namespace podstyle;

namespace {

const fs::path kFixture = PODSTYLE_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("podstyle_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

RunConfig fixture_config(const fs::path& out) {
  return load_run_config(kFixture / "config.json", {{"paths.output_dir", out.string()}});
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(PODSTYLE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// One full fixture run shared by the tests below.
class FixtureRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    out_ = new fs::path(scratch("full"));
    std::ostringstream log;
    run_pipeline(fixture_config(*out_), {stage_names().begin(), stage_names().end()}, log);
  }
  static void TearDownTestSuite() {
    fs::remove_all(*out_);
    delete out_;
  }
  static fs::path* out_;
};

fs::path* FixtureRun::out_ = nullptr;

}  // namespace

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = load_run_config("", {{"lda.num_topics", "12"}, {"seed", "9"}, {"model.k_sweep", "[10, 20]"}});
  EXPECT_EQ(cfg.lda.num_topics, 12);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.k_sweep, (std::vector<double>{10, 20}));
  EXPECT_EQ(cfg.filter.min_duration_s, 600.0);
  EXPECT_EQ(cfg.stats.bootstrap_b, 10000);
  EXPECT_THROW(load_run_config("", {{"lda.nope", "1"}}), ConfigError);
  EXPECT_THROW(load_run_config("", {{"lda.num_topics", "many"}}), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/config.json", {}), ConfigError);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "a.json") << R"({"lda": {"topics": 5}})";
  EXPECT_THROW(load_run_config(dir / "a.json", {}), ConfigError);
  std::ofstream(dir / "b.json") << R"({"stats": {"alpha": 2.0}})";
  EXPECT_THROW(load_run_config(dir / "b.json", {}), ConfigError);
  std::ofstream(dir / "c.json") << "{ not json";
  EXPECT_THROW(load_run_config(dir / "c.json", {}), ConfigError);
  fs::remove_all(dir);
}

TEST(Config, DigestIgnoresOutputDir) {
  EXPECT_EQ(config_digest(fixture_config("/tmp/a")), config_digest(fixture_config("/tmp/b")));
  EXPECT_NE(config_digest(fixture_config("/tmp/a")),
            config_digest(load_run_config(kFixture / "config.json", {{"seed", "8"}})));
}

TEST(Stages, MissingDependencyNamesStage) {
  const auto out = scratch("dep");
  const auto cfg = fixture_config(out);
  try {
    run_pipeline(cfg, {"cv"});
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("'ingest'"), std::string::npos) << e.what();
  }
  std::ostringstream log;
  run_pipeline(cfg, {"ingest"}, log);
  try {
    run_pipeline(cfg, {"cv"}, log);
    FAIL() << "expected DependencyError";
  } catch (const DependencyError& e) {
    EXPECT_NE(std::string(e.what()).find("'features'"), std::string::npos) << e.what();
  }
  EXPECT_THROW(run_pipeline(cfg, {"bogus"}, log), ConfigError);
  fs::remove_all(out);
}

TEST_F(FixtureRun, EveryArtifactHasHeaderAndManifestEntry) {
  const auto cfg = fixture_config(*out_);
  const std::string header = ArtifactStore(cfg).header_text();
  const auto manifest = nlohmann::json::parse(read_file(*out_ / "manifest.json"));
  EXPECT_EQ(manifest.at("config_digest"), config_digest(cfg));
  EXPECT_EQ(manifest.at("seed"), 7);
  for (const auto& [stage, outputs] : stage_outputs()) {
    ASSERT_TRUE(manifest.at("stages").contains(stage)) << stage;
    for (const auto& name : outputs) {
      const auto p = *out_ / name;
      ASSERT_TRUE(fs::exists(p)) << name;
      EXPECT_NE(first_line(p).find(header), std::string::npos) << name;
      EXPECT_EQ(manifest["stages"][stage]["artifacts"].at(name), sha256_file(p)) << name;
    }
  }
  for (const char* input : {"corpus", "easy_words", "tagger_model"}) {
    EXPECT_TRUE(manifest.at("inputs").contains(input)) << input;
  }
}

TEST_F(FixtureRun, FeatureTableShape) {
  std::ifstream in(*out_ / "features.csv");
  const auto t = read_table_csv(in);
  EXPECT_EQ(t.num_cols(), feature_columns().size());
  const auto corpus = load_corpus((*out_ / "corpus.filtered.jsonl").string());
  EXPECT_EQ(t.num_rows(), corpus.episodes.size());
  for (const auto& row : t.rows) {
    for (double v : row) EXPECT_TRUE(std::isfinite(v));
  }
}

TEST_F(FixtureRun, RerunIsByteIdentical) {
  const auto out2 = scratch("rerun");
  std::ostringstream log;
  run_pipeline(fixture_config(out2), {stage_names().begin(), stage_names().end()}, log);
  for (const auto& [stage, outputs] : stage_outputs()) {
    for (const auto& name : outputs) EXPECT_EQ(sha256_file(*out_ / name), sha256_file(out2 / name)) << name;
  }
  const auto m1 = nlohmann::json::parse(read_file(*out_ / "manifest.json"));
  const auto m2 = nlohmann::json::parse(read_file(out2 / "manifest.json"));
  EXPECT_EQ(m1, m2);
  fs::remove_all(out2);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  const std::string cfg = (kFixture / "config.json").string();
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli("--no-such-flag"), 1);
  EXPECT_EQ(cli("--config " + cfg + " --set lda.bogus=1 ingest"), 1);
  EXPECT_EQ(cli("--config " + cfg + " --set paths.output_dir=" + (dir / "o").string() + " model cv"), 1);

  std::ofstream(dir / "bad.jsonl") << "{\"show_id\": 1}\n";
  EXPECT_EQ(cli("--config " + cfg + " --set paths.corpus=" + (dir / "bad.jsonl").string() +
                " --set paths.output_dir=" + (dir / "o").string() + " ingest"),
            2);
  EXPECT_EQ(cli("synth seeds --out " + (dir / "seeds.tsv").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "seeds.tsv"));
  fs::remove_all(dir);
}

TEST(Errors, ExitCodeMapping) {
  EXPECT_EQ(exit_code(ConfigError("x")), 1);
  EXPECT_EQ(exit_code(DependencyError("x")), 1);
  EXPECT_EQ(exit_code(DataError("x")), 2);
  EXPECT_EQ(exit_code(InvariantError("x")), 3);
  EXPECT_EQ(exit_code(std::runtime_error("x")), 3);
}

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "oracles.hpp"
#include "podstyle/topics.hpp"

using namespace podstyle;

namespace {

LdaModel manual_model(const std::vector<std::string>& vocab, const std::vector<std::vector<std::int64_t>>& rows) {
  LdaModel m;
  m.num_topics = static_cast<int>(rows.front().size());
  m.alpha = 0.1;
  m.beta = 0.01;
  m.iterations = 1;
  m.vocab = vocab;
  m.topic_totals.assign(static_cast<std::size_t>(m.num_topics), 0);
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    m.index.emplace(vocab[w], static_cast<int>(w));
    for (int k = 0; k < m.num_topics; ++k) {
      m.word_topic.push_back(rows[w][static_cast<std::size_t>(k)]);
      m.topic_totals[static_cast<std::size_t>(k)] += rows[w][static_cast<std::size_t>(k)];
    }
  }
  return m;
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST(LdaTokens, Filters) {
  const std::unordered_set<std::string> stop = {"the", "and"};
  EXPECT_EQ(lda_tokens({"the", "garden", "a", "<URL>", "<HANDLE>", "42", "and", "tomato", "x1"}, stop),
            (TokenDoc{"garden", "tomato", "x1"}));
}

TEST(Lda, SweepInvariants) {
  const auto data = oracle::two_topic_corpus(30, 40, 3);
  int sweeps = 0;
  const auto m = train_lda(data.docs, {.num_topics = 4, .iterations = 25, .min_count = 1, .seed = 5},
                           [&](const LdaSweepState& s) {
                             EXPECT_EQ(s.sweep, sweeps++);
                             const std::size_t K = s.topic_totals.size();
                             std::int64_t total = 0;
                             std::vector<std::int64_t> col(K, 0);
                             for (std::size_t i = 0; i < s.word_topic.size(); ++i) {
                               EXPECT_GE(s.word_topic[i], 0);
                               col[i % K] += s.word_topic[i];
                               total += s.word_topic[i];
                             }
                             EXPECT_EQ(static_cast<std::size_t>(total), s.num_tokens);
                             for (std::size_t k = 0; k < K; ++k) EXPECT_EQ(col[k], s.topic_totals[k]);
                             EXPECT_TRUE(std::isfinite(s.loglik));
                           });
  EXPECT_EQ(sweeps, 25);
  EXPECT_EQ(m.loglik_trace.size(), 25u);
  EXPECT_EQ(std::accumulate(m.topic_totals.begin(), m.topic_totals.end(), std::int64_t{0}), 30 * 40);
  EXPECT_DOUBLE_EQ(m.alpha, 50.0 / 4);
}

TEST(Lda, Deterministic) {
  const auto data = oracle::two_topic_corpus(20, 30, 9);
  const LdaParams p{.num_topics = 3, .iterations = 10, .min_count = 1, .seed = 11};
  const auto a = train_lda(data.docs, p), b = train_lda(data.docs, p);
  EXPECT_EQ(a.word_topic, b.word_topic);
  EXPECT_EQ(a.loglik_trace, b.loglik_trace);
  const auto c = train_lda(data.docs, {.num_topics = 3, .iterations = 10, .min_count = 1, .seed = 12});
  EXPECT_NE(a.word_topic, c.word_topic);
}

TEST(Lda, MinCountAndErrors) {
  const std::vector<TokenDoc> docs = {{"a", "a", "b"}, {"a", "c", "b"}};
  const auto m = train_lda(docs, {.num_topics = 2, .iterations = 2, .min_count = 2});
  EXPECT_EQ(m.vocab, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(m.word_id("c"), -1);
  EXPECT_THROW(train_lda(docs, {.num_topics = 2, .iterations = 2, .min_count = 9}), DataError);
  EXPECT_THROW(train_lda(docs, {.num_topics = 0, .iterations = 2, .min_count = 1}), ConfigError);
  EXPECT_THROW(train_lda(docs, {.num_topics = 2, .iterations = 0, .min_count = 1}), ConfigError);
}

TEST(Lda, InferenceIsADistribution) {
  const auto data = oracle::two_topic_corpus(40, 50, 4);
  const auto m = train_lda(data.docs, {.num_topics = 5, .iterations = 30, .min_count = 1, .seed = 2});
  for (std::size_t d = 0; d < 5; ++d) {
    const auto dt = infer_doc_topics(m, data.docs[d], 20, d);
    EXPECT_FALSE(dt.empty);
    ASSERT_EQ(dt.theta.size(), 5u);
    EXPECT_NEAR(std::accumulate(dt.theta.begin(), dt.theta.end(), 0.0), 1.0, 1e-12);
    for (double v : dt.theta) EXPECT_GT(v, 0.0);
  }
  const auto empty = infer_doc_topics(m, {"unknownword"}, 20, 1);
  EXPECT_TRUE(empty.empty);
  for (double v : empty.theta) EXPECT_DOUBLE_EQ(v, 0.2);
}

TEST(Lda, RecoversTwoTopics) {
  const auto data = oracle::two_topic_corpus(200, 60, 21);
  const auto m = train_lda(data.docs, {.num_topics = 2, .iterations = 100, .min_count = 1, .seed = 3});
  std::vector<int> cluster;
  for (std::size_t d = 0; d < data.docs.size(); ++d) {
    cluster.push_back(argmax(infer_doc_topics(m, data.docs[d], 30, d).theta));
  }
  EXPECT_GE(oracle::purity(cluster, data.labels), 0.9);
}

TEST(Coherence, HandComputedUMass) {
  const auto m = manual_model({"a", "b", "c"}, {{3}, {2}, {1}});
  EXPECT_EQ(top_words(m, 0, 3), (std::vector<std::string>{"a", "b", "c"}));
  const std::vector<TokenDoc> docs = {{"a", "b"}, {"a"}, {"b", "c"}, {"a", "b", "c"}};
  // D(a)=3, D(b)=3, D(a,b)=2, D(a,c)=1, D(b,c)=2.
  const double expect = std::log(3.0 / 3.0) + std::log(2.0 / 3.0) + std::log(3.0 / 3.0);
  EXPECT_NEAR(coherence_umass(m, docs, 3), expect, 1e-12);
  EXPECT_THROW(coherence_umass(m, docs, 1), ConfigError);
}

TEST(Coherence, SelectsTrueTopicCount) {
  const auto data = oracle::two_topic_corpus(200, 60, 5);
  const auto choice = select_topic_count(data.docs, {2, 10}, {.iterations = 60, .min_count = 1, .seed = 4});
  EXPECT_EQ(choice.best, 2);
  ASSERT_EQ(choice.scores.size(), 2u);
  EXPECT_THROW(select_topic_count(data.docs, {}, {}), ConfigError);
}

TEST(TopWords, TiesAreLexicographic) {
  const auto m = manual_model({"b", "a", "c"}, {{2, 0}, {2, 1}, {1, 5}});
  EXPECT_EQ(top_words(m, 0, 2), (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(top_words(m, 1, 10), (std::vector<std::string>{"c", "a", "b"}));
  EXPECT_THROW(top_words(m, 2, 1), ConfigError);
}

TEST(Roles, ReviewRoundTripAndFractions) {
  const auto m = manual_model({"ad", "damn", "um", "x"}, {{9, 0, 0}, {0, 9, 0}, {0, 0, 9}, {1, 1, 1}});
  SpecialTopicMap roles;
  roles[TopicRole::ad].insert(0);
  roles[TopicRole::swear].insert(1);
  std::stringstream ss;
  write_topic_review(m, roles, ss);
  const auto back = read_topic_review(ss);
  EXPECT_EQ(back.topics, roles.topics);
  const auto f = topic_fractions({{0.2, 0.3, 0.5}, false}, roles);
  EXPECT_DOUBLE_EQ(f.ad, 0.2);
  EXPECT_DOUBLE_EQ(f.swear, 0.3);
  EXPECT_DOUBLE_EQ(f.filler, 0.0);
  roles[TopicRole::filler].insert(7);
  EXPECT_THROW(roles.validate(3), DataError);
  EXPECT_THROW(topic_fractions({{0.2, 0.3, 0.5}, false}, roles), DataError);
  std::istringstream bad("0\tspam\n");
  EXPECT_THROW(read_topic_review(bad), DataError);
}

TEST(Roles, SuggestFromSeeds) {
  const auto m = manual_model({"ad", "damn", "um", "x"}, {{9, 0, 0}, {0, 9, 0}, {0, 0, 9}, {1, 1, 1}});
  const auto s = suggest_topic_roles(m, {{TopicRole::swear, {"damn"}}, {TopicRole::filler, {"um"}}}, 2, 0.5);
  EXPECT_EQ(s[TopicRole::swear], (std::set<int>{1}));
  EXPECT_EQ(s[TopicRole::filler], (std::set<int>{2}));
  EXPECT_TRUE(s[TopicRole::ad].empty());
}

TEST(Lda, SerializationRoundTrip) {
  const auto data = oracle::two_topic_corpus(10, 20, 1);
  const auto m = train_lda(data.docs, {.num_topics = 3, .iterations = 5, .min_count = 1, .seed = 8});
  std::stringstream ss;
  write_lda_model(m, ss);
  const auto r = read_lda_model(ss);
  EXPECT_EQ(r.vocab, m.vocab);
  EXPECT_EQ(r.word_topic, m.word_topic);
  EXPECT_EQ(r.topic_totals, m.topic_totals);
  EXPECT_DOUBLE_EQ(r.alpha, m.alpha);
  EXPECT_EQ(r.seed, m.seed);
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_EQ(infer_doc_topics(r, data.docs[d], 10, 4).theta, infer_doc_topics(m, data.docs[d], 10, 4).theta);
  }
  std::istringstream bad("podstyle-lda 2\n");
  EXPECT_THROW(read_lda_model(bad), DataError);
}

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "podstyle/pipeline.hpp"
#include "podstyle/synth.hpp"
#include "podstyle/textkit/langid.hpp"
#include "podstyle/textkit/normalize.hpp"
#include "podstyle/textkit/syllables.hpp"
#include "podstyle/textkit/tagger.hpp"
#include "podstyle/textkit/tokenize.hpp"

using namespace podstyle;

namespace {

std::vector<std::string> surfaces(const Sentence& s) {
  std::vector<std::string> out;
  for (const auto& t : s) out.push_back(t.surface);
  return out;
}

std::multiset<char32_t> letters(std::string_view s) {
  std::multiset<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const char32_t c = utf8::next(s, i);
    if (utf8::is_letter(c)) out.insert(c);
  }
  return out;
}

}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_text("Visit HTTPS://x.com NOW"), "visit <URL> now");
  EXPECT_EQ(normalize_text("ping @host_123"), "ping <HANDLE>");
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text("  lots \t of\n\nspace  "), "lots of space");
  EXPECT_EQ(normalize_text("see www.example.org/page, thanks"), "see <URL>, thanks");
}

TEST(Normalize, Idempotent) {
  for (const char* s : {"Visit HTTPS://x.com NOW", "Mail me @Bob! Or see example.com.", "ÉCOLE  Straße",
                        "(https://a.b/c?d=1) and @x_y.", "plain words only"}) {
    const auto once = normalize_text(s);
    EXPECT_EQ(normalize_text(once), once) << s;
  }
}

TEST(Tokenize, SentenceExamples) {
  const auto s = tokenize_sentences("Hi there. Bye!");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(surfaces(s[0]), (std::vector<std::string>{"Hi", "there", "."}));
  EXPECT_EQ(surfaces(s[1]), (std::vector<std::string>{"Bye", "!"}));
  EXPECT_EQ(tokenize_sentences("Dr. Smith left.").size(), 1u);
  EXPECT_TRUE(tokenize_sentences("").empty());
}

TEST(Tokenize, TwentySentenceSegmentation) {
  // Hand segmentation: every entry is one sentence.
  const std::vector<std::string> gold = {
      "Dr. Smith left early.",
      "We met Mr. Jones at noon.",
      "Is it raining?",
      "Wow!",
      "The price went up 3.5 percent.",
      "She said no.",
      "Prof. Lee teaches physics.",
      "They arrived at 10 a.m. sharp.",
      "I don't know.",
      "Visit example.com for more.",
      "Ask @host_1 about it.",
      "Well, that was odd.",
      "It costs $1,000 now.",
      "Mrs. Brown laughed.",
      "The U.S. team won.",
      "Really?",
      "Go home.",
      "We talked about e.g. sleep and diet.",
      "St. Louis is nice.",
      "That's all, folks!",
  };
  std::string text;
  for (const auto& g : gold) text += (text.empty() ? "" : " ") + g;
  const auto s = tokenize_sentences(text);
  ASSERT_EQ(s.size(), gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) {
    std::string letters_gold, letters_got;
    for (char c : gold[i]) {
      if (std::isalpha(static_cast<unsigned char>(c))) letters_gold.push_back(c);
    }
    for (const auto& t : s[i]) {
      for (char c : t.surface) {
        if (std::isalpha(static_cast<unsigned char>(c))) letters_got.push_back(c);
      }
    }
    EXPECT_EQ(letters_got, letters_gold) << "sentence " << i;
  }
}

TEST(Tokenize, PreservesLetters) {
  for (const char* text : {"Hi there. Bye!", "Don't stop-believing, O'Neil; it's 3.5 km.",
                           "Ça va? Très bien, merci.", "URLs like http://x.y/z and @me stay.", ""}) {
    std::string joined;
    for (const auto& sent : tokenize_sentences(text)) {
      for (const auto& t : sent) joined += t.surface + " ";
    }
    EXPECT_EQ(letters(joined), letters(text)) << text;
  }
}

TEST(Tokenize, NormNonEmpty) {
  for (const auto& sent : tokenize_sentences("Hello, WORLD! Visit https://a.io now @x.")) {
    for (const auto& t : sent) {
      EXPECT_FALSE(t.surface.empty());
      EXPECT_FALSE(t.norm.empty());
    }
  }
}

TEST(Syllables, Examples) {
  EXPECT_EQ(count_syllables("cat"), 1);
  EXPECT_EQ(count_syllables("table"), 2);
  EXPECT_EQ(count_syllables("queue"), 1);
  EXPECT_EQ(count_syllables("123"), 1);
  EXPECT_EQ(count_syllables("Table!"), 2);
}

TEST(Syllables, DictionaryAgreement) {
  int agree = 0;
  for (const auto& e : oracle::kSyllables) agree += count_syllables(e.word) == e.syllables;
  EXPECT_GE(agree, 90) << agree << " of 100";
}

TEST(Syllables, AtLeastOne) {
  for (const char* w : {"a", "b", "rhythm", "xyz", "e", "the", "strengths", "'", "ﬁ"}) {
    EXPECT_GE(count_syllables(w), 1) << w;
  }
}

TEST(Tagger, MemorizesOneSentence) {
  const TaggedSentence s = {{"The", PosTag::DET}, {"dog", PosTag::NOUN}, {"barked", PosTag::VERB}, {".", PosTag::PUNCT}};
  const auto m = train_tagger({s}, 5, 3);
  EXPECT_DOUBLE_EQ(tagging_accuracy(m, {s}), 1.0);
}

TEST(Tagger, Errors) {
  EXPECT_THROW(train_tagger({}, 5, 1), DataError);
  std::istringstream bad("dog\tNOUNISH\n\n");
  EXPECT_THROW(read_tagged_corpus(bad), DataError);
}

TEST(Tagger, EmptyAndPunct) {
  const auto m = train_tagger(synth::tagged_sentences(200, 4), 3, 1);
  EXPECT_TRUE(pos_tag(m, {}).empty());
  Token dot{".", ".", std::nullopt, false};
  EXPECT_EQ(pos_tag(m, {dot})[0].pos, PosTag::PUNCT);
}

TEST(Tagger, ShippedModel) {
  const auto m = load_tagger_model(oracle::data_path("tagger/podstyle-ap.model"));
  const auto toks = flatten(tokenize_sentences("the cat sat on the mat."));
  const auto tagged = pos_tag(m, toks);
  ASSERT_EQ(tagged.size(), toks.size());
  EXPECT_EQ(tagged[0].pos, PosTag::DET);
  EXPECT_EQ(tagged.back().pos, PosTag::PUNCT);
  // Pinned regression bounds on the held-out sets shipped next to the model.
  EXPECT_GE(tagging_accuracy(m, read_tagged_corpus_file(oracle::data_path("tagger/synthetic.heldout.tsv"))), 0.98);
  EXPECT_GE(tagging_accuracy(m, read_tagged_corpus_file(oracle::data_path("tagger/handtagged.heldout.tsv"))), 0.85);
}

TEST(Tagger, DeterministicAndRoundTrip) {
  const auto data = synth::tagged_sentences(300, 9);
  const auto a = train_tagger(data, 4, 17);
  const auto b = train_tagger(data, 4, 17);
  EXPECT_TRUE(a == b);
  std::stringstream ss;
  write_tagger_model(a, ss);
  const auto c = read_tagger_model(ss);
  EXPECT_TRUE(a == c);
  const auto toks = flatten(tokenize_sentences("We talk about the old stadium. It was huge!"));
  const auto t1 = pos_tag(a, toks), t2 = pos_tag(c, toks);
  ASSERT_EQ(t1.size(), toks.size());
  for (std::size_t i = 0; i < t1.size(); ++i) EXPECT_EQ(t1[i].pos, t2[i].pos);
}

TEST(LangId, ShippedProfiles) {
  const auto profiles = load_language_profiles(oracle::data_path("langid"));
  ASSERT_EQ(profiles.size(), 5u);
  const std::string en =
      "We talked with our guest about the history of the town, the people who built it, and the "
      "stories they still tell each other on long winter evenings by the fire.";
  const std::string es =
      "Hablamos con nuestro invitado sobre la historia del pueblo, la gente que lo construyó y las "
      "historias que todavía se cuentan en las largas noches de invierno junto al fuego.";
  EXPECT_EQ(detect_language(en, profiles).language, "en");
  EXPECT_EQ(detect_language(es, profiles).language, "es");
  LanguageProfiles two;
  for (const auto& p : profiles) {
    if (p.language == "en" || p.language == "es") two.push_back(p);
  }
  EXPECT_EQ(detect_language(en, two).language, "en");
  EXPECT_EQ(detect_language(es, two).language, "es");
  const auto und = detect_language("123 456", profiles);
  EXPECT_EQ(und.language, "und");
  EXPECT_EQ(und.confidence, 0.0);
  const auto g = detect_language(en, profiles);
  EXPECT_GT(g.confidence, 0.0);
  EXPECT_LE(g.confidence, 1.0);
}

TEST(LangId, ProfileRoundTrip) {
  const auto p = build_language_profile("xx", "some sample text with enough letters to rank trigrams");
  std::stringstream ss;
  write_language_profile(p, ss);
  const auto q = read_language_profile(ss);
  EXPECT_EQ(q.language, "xx");
  EXPECT_EQ(q.ranked, p.ranked);
  EXPECT_THROW(detect_language("anything", {}), ConfigError);
}

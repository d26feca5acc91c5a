#pragma once

// Synthetic corpora with known ground truth: a small tagged English grammar
// and an episode generator whose latent engagement drives noun diversity,
// speech rate, and swear-word use.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "podstyle/common.hpp"
#include "podstyle/corpus.hpp"
#include "podstyle/features.hpp"
#include "podstyle/lexicons.hpp"
#include "podstyle/textkit/syllables.hpp"
#include "podstyle/textkit/tagger.hpp"
#include "podstyle/textkit/utf8.hpp"
#include "podstyle/topics.hpp"

namespace podstyle::synth {

using WordList = std::vector<std::string_view>;

struct Genre {
  std::string_view name;
  WordList nouns;
};

inline const std::vector<Genre>& genres() {
  static const std::vector<Genre> g = {
      {"sports",
       {"quarterback", "playoff", "referee", "stadium", "tournament", "roster", "rookie", "coach",
        "season", "league", "pitcher", "goalie", "striker", "halftime", "touchdown", "inning",
        "championship", "draft", "trade", "contract", "injury", "defense", "offense", "scoreboard",
        "helmet", "jersey", "mascot", "dugout", "fanbase", "overtime", "penalty", "umpire",
        "bracket", "athlete", "trophy", "marathon", "sprinter", "racket", "wrestler", "franchise"}},
      {"crime",
       {"detective", "suspect", "witness", "alibi", "evidence", "murder", "robbery", "verdict",
        "jury", "prosecutor", "lawyer", "courtroom", "motive", "victim", "fingerprint", "autopsy",
        "sheriff", "warrant", "interrogation", "confession", "kidnapping", "ransom", "heist",
        "forensics", "coroner", "informant", "cartel", "smuggler", "inmate", "parole", "homicide",
        "investigator", "testimony", "burglary", "fraud", "accomplice", "hostage", "gunshot",
        "detainee", "indictment"}},
      {"science",
       {"molecule", "galaxy", "telescope", "neuron", "protein", "genome", "fossil", "asteroid",
        "experiment", "hypothesis", "laboratory", "particle", "quantum", "enzyme", "bacteria",
        "climate", "glacier", "volcano", "satellite", "orbit", "microscope", "chemistry",
        "physicist", "biologist", "vaccine", "virus", "mutation", "algorithm", "robot", "reactor",
        "isotope", "nebula", "comet", "ecosystem", "species", "habitat", "photon", "electron",
        "theorem", "dataset"}},
      {"comedy",
       {"punchline", "sitcom", "roommate", "prank", "improv", "sketch", "comedian", "heckler",
        "standup", "parody", "blooper", "costume", "karaoke", "hangover", "awkwardness", "tinder",
        "bachelor", "sleepover", "nickname", "cousin", "landlord", "neighbor", "barista", "uber",
        "selfie", "meme", "gossip", "celebrity", "influencer", "podcaster", "mixtape", "burrito",
        "pickle", "nacho", "taco", "donut", "waffle", "pancake", "pizza", "spaghetti"}},
      {"business",
       {"startup", "investor", "revenue", "marketing", "founder", "valuation", "strategy",
        "customer", "product", "pricing", "budget", "salary", "economy", "inflation", "interest",
        "mortgage", "portfolio", "dividend", "stock", "crypto", "bitcoin", "entrepreneur",
        "leadership", "management", "negotiation", "recruiter", "resume", "interview",
        "promotion", "consultant", "software", "platform", "subscription", "analytics",
        "logistics", "supplier", "invoice", "accountant", "merger", "layoff"}},
      {"wellness",
       {"meditation", "yoga", "therapy", "therapist", "anxiety", "mindset", "nutrition", "protein",
        "workout", "cardio", "vitamin", "sleep", "routine", "journal", "gratitude", "breathing",
        "posture", "stretching", "diet", "calorie", "hormone", "supplement", "recovery", "burnout",
        "boundary", "self", "wellness", "mindfulness", "affirmation", "retreat", "massage",
        "acupuncture", "smoothie", "kombucha", "avocado", "quinoa", "juice", "detox", "habit",
        "energy"}},
  };
  return g;
}

// Substituted for nouns in transcripts.
inline const WordList& swear_words() {
  static const WordList w = {"damn",    "crap",     "shit",     "fuck",      "hell",     "piss",
                             "bloody",  "freaking", "bastard",  "bullshit",  "dammit",   "goddamn",
                             "asshole", "jackass",  "dumbass",  "fucking",   "shitty",   "crappy",
                             "goddammit", "motherfucker", "horseshit", "clusterfuck", "dipshit",
                             "frigging", "shitstorm", "bollocks", "arsehole", "wanker", "sodding"};
  return w;
}

inline const WordList& filler_words() {
  static const WordList w = {"um", "uh", "yeah", "hmm", "okay", "mhm", "erm"};
  return w;
}

inline const WordList& ad_words() {
  static const WordList w = {"sponsor", "sponsored", "promo", "code", "discount", "offer", "shipping",
                             "percent", "checkout", "website", "acme", "zenbox", "brightmail",
                             "freshcart", "trial", "coupon", "deal"};
  return w;
}

inline std::map<TopicRole, std::unordered_set<std::string>> topic_seeds() {
  std::map<TopicRole, std::unordered_set<std::string>> s;
  for (auto w : swear_words()) s[TopicRole::swear].insert(std::string(w));
  for (auto w : filler_words()) s[TopicRole::filler].insert(std::string(w));
  for (auto w : ad_words()) s[TopicRole::ad].insert(std::string(w));
  return s;
}

// Adjectives that carry emotion labels in the demo lexicon.
inline const WordList& emotion_adjectives() {
  static const WordList w = {"happy", "sad", "angry", "scary", "wonderful", "terrible", "awful",
                             "proud", "nervous", "joyful", "hopeful", "disgusting", "surprising",
                             "gross", "lovely", "afraid", "excited", "furious", "miserable",
                             "delightful"};
  return w;
}

namespace detail {

inline const std::map<PosTag, WordList>& pools() {
  static const std::map<PosTag, WordList> p = {
      {PosTag::DET, {"the", "a", "this", "that", "every", "some", "each", "another"}},
      {PosTag::PRON, {"i", "we", "you", "they", "he", "she", "it", "everyone", "someone"}},
      {PosTag::AUX, {"is", "was", "are", "were", "will", "can", "would", "should", "might"}},
      {PosTag::VERB, {"talk", "think", "love", "build", "play", "watch", "discuss", "explore", "share",
                      "learn", "make", "find", "know", "tell", "hear", "miss", "need", "remember",
                      "believe", "start", "change", "try", "explain", "visit", "follow", "break",
                      "describe", "imagine", "question", "celebrate"}},
      {PosTag::ADJ, {"big", "small", "new", "old", "real", "whole", "different", "important", "local",
                     "early", "late", "strange", "simple", "weird", "long", "short", "main", "huge",
                     "recent", "famous", "classic", "random", "serious", "quick"}},
      {PosTag::ADV, {"really", "very", "just", "never", "always", "actually", "probably", "basically",
                     "honestly", "maybe", "definitely", "totally", "quite", "often", "finally"}},
      {PosTag::ADP, {"about", "with", "in", "on", "for", "from", "at", "into", "over", "after",
                     "before", "without"}},
      {PosTag::CCONJ, {"and", "but", "or", "so"}},
      {PosTag::SCONJ, {"because", "if", "when", "while", "although", "since", "unless"}},
      {PosTag::INTJ, {"um", "uh", "yeah", "hmm", "okay", "mhm", "erm"}},
      {PosTag::NUM, {"two", "three", "five", "ten", "twenty", "hundred", "2019", "2020", "1999", "42"}},
      {PosTag::PROPN, {"Alex", "Jordan", "Taylor", "Morgan", "Sam", "Chris", "Jamie", "Casey", "Riley",
                       "Avery", "London", "Texas", "Paris", "Chicago", "Denver", "Ohio"}},
  };
  return p;
}

// Sentence shapes; "," "." "!" "?" are literal punctuation, "to" and "not"
// are PART, everything else names a tag pool.
inline const std::vector<std::vector<std::string_view>>& templates() {
  static const std::vector<std::vector<std::string_view>> t = {
      {"DET", "ADJ", "NOUN", "VERB", "ADP", "DET", "NOUN", "."},
      {"PRON", "AUX", "ADV", "VERB", "DET", "NOUN", "CCONJ", "DET", "NOUN", "."},
      {"INTJ", ",", "PRON", "VERB", "ADP", "DET", "ADJ", "NOUN", "."},
      {"SCONJ", "PRON", "VERB", "DET", "NOUN", ",", "PRON", "AUX", "VERB", "ADP", "PROPN", "."},
      {"PRON", "AUX", "not", "ADJ", "ADP", "DET", "NOUN", "."},
      {"DET", "NOUN", "AUX", "ADJ", ",", "CCONJ", "PRON", "VERB", "NUM", "NOUN", "."},
      {"PRON", "VERB", "to", "VERB", "DET", "NOUN", "ADP", "PROPN", "?"},
      {"ADV", ",", "PRON", "VERB", "DET", "ADJ", "NOUN", "!"},
      {"PROPN", "AUX", "ADV", "ADJ", "ADP", "DET", "NOUN", "."},
      {"INTJ", ",", "INTJ", ",", "DET", "NOUN", "AUX", "ADV", "ADJ", "."},
      {"PRON", "VERB", "DET", "NOUN", "ADP", "NUM", "."},
      {"DET", "ADJ", "NOUN", "CCONJ", "DET", "NOUN", "AUX", "ADJ", "."},
  };
  return t;
}

inline const std::vector<TaggedSentence>& ad_reads() {
  static const std::vector<TaggedSentence> reads = [] {
    const std::vector<std::vector<std::pair<std::string_view, PosTag>>> raw = {
        {{"This", PosTag::DET}, {"episode", PosTag::NOUN}, {"is", PosTag::AUX}, {"sponsored", PosTag::VERB},
         {"by", PosTag::ADP}, {"Acme", PosTag::PROPN}, {".", PosTag::PUNCT}},
        {{"Use", PosTag::VERB}, {"promo", PosTag::NOUN}, {"code", PosTag::NOUN}, {"podcast", PosTag::NOUN},
         {"for", PosTag::ADP}, {"twenty", PosTag::NUM}, {"percent", PosTag::NOUN}, {"off", PosTag::ADP},
         {"at", PosTag::ADP}, {"checkout", PosTag::NOUN}, {".", PosTag::PUNCT}},
        {{"Zenbox", PosTag::PROPN}, {"offers", PosTag::VERB}, {"free", PosTag::ADJ}, {"shipping", PosTag::NOUN},
         {"and", PosTag::CCONJ}, {"a", PosTag::DET}, {"discount", PosTag::NOUN}, {"on", PosTag::ADP},
         {"your", PosTag::PRON}, {"first", PosTag::ADJ}, {"order", PosTag::NOUN}, {".", PosTag::PUNCT}},
        {{"Try", PosTag::VERB}, {"Brightmail", PosTag::PROPN}, {"with", PosTag::ADP}, {"a", PosTag::DET},
         {"free", PosTag::ADJ}, {"trial", PosTag::NOUN}, {"on", PosTag::ADP}, {"their", PosTag::PRON},
         {"website", PosTag::NOUN}, {".", PosTag::PUNCT}},
        {{"Freshcart", PosTag::PROPN}, {"has", PosTag::VERB}, {"a", PosTag::DET}, {"coupon", PosTag::NOUN},
         {"deal", PosTag::NOUN}, {"for", PosTag::ADP}, {"listeners", PosTag::NOUN}, {"!", PosTag::PUNCT}},
    };
    std::vector<TaggedSentence> out;
    for (const auto& s : raw) {
      TaggedSentence ts;
      for (const auto& [w, t] : s) ts.push_back({std::string(w), t});
      out.push_back(std::move(ts));
    }
    return out;
  }();
  return reads;
}

inline std::string capitalize(std::string_view w) {
  std::string s(w);
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

template <typename List>
std::string_view pick(Rng& rng, const List& list) {
  return list[rng.below(list.size())];
}

}  // namespace detail

// How nouns and adjectives are filled in while generating a sentence.
struct SlotFiller {
  const std::vector<std::string_view>* nouns = nullptr;  // defaults to a random genre
  double swear_rate = 0.0;
  double emotion_rate = 0.2;
  const std::map<std::pair<bool, int>, std::vector<std::string_view>>* swear_buckets = nullptr;
  const EasyWordSet* easy = nullptr;
};

// Swear words grouped by (easy word?, syllable count capped at 3), so a
// substitution leaves readability scores unchanged in expectation.
inline std::map<std::pair<bool, int>, std::vector<std::string_view>> swear_buckets(const EasyWordSet& easy) {
  std::map<std::pair<bool, int>, std::vector<std::string_view>> b;
  for (auto w : swear_words()) {
    b[{!is_difficult(w, easy), std::min(count_syllables(w), 3)}].push_back(w);
  }
  return b;
}

inline TaggedSentence generate_sentence(Rng& rng, const SlotFiller& f) {
  const auto& tpl = detail::templates()[rng.below(detail::templates().size())];
  TaggedSentence out;
  for (auto slot : tpl) {
    if (slot == "." || slot == "," || slot == "!" || slot == "?") {
      out.push_back({std::string(slot), PosTag::PUNCT});
    } else if (slot == "to" || slot == "not") {
      out.push_back({std::string(slot), PosTag::PART});
    } else if (slot == "NOUN") {
      const auto& nouns = f.nouns ? *f.nouns : genres()[rng.below(genres().size())].nouns;
      std::string w(detail::pick(rng, nouns));
      if (f.swear_rate > 0.0 && rng.bernoulli(f.swear_rate)) {
        if (f.swear_buckets && f.easy) {
          const auto key = std::make_pair(!is_difficult(w, *f.easy), std::min(count_syllables(w), 3));
          const auto it = f.swear_buckets->find(key);
          if (it != f.swear_buckets->end()) w = detail::pick(rng, it->second);
        } else {
          w = detail::pick(rng, swear_words());
        }
      }
      out.push_back({w, PosTag::NOUN});
    } else if (slot == "ADJ" && rng.bernoulli(f.emotion_rate)) {
      out.push_back({std::string(detail::pick(rng, emotion_adjectives())), PosTag::ADJ});
    } else {
      const auto tag = *parse_pos_tag(slot);
      std::string w(detail::pick(rng, detail::pools().at(tag)));
      if (tag == PosTag::PRON && w == "i") w = "I";
      out.push_back({std::move(w), tag});
    }
  }
  out.front().surface = detail::capitalize(out.front().surface);
  return out;
}

// Gold-tagged sentences for tagger training and evaluation.
inline std::vector<TaggedSentence> tagged_sentences(std::size_t n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "tagged"));
  std::vector<TaggedSentence> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rng.bernoulli(0.05)) {
      out.push_back(detail::ad_reads()[rng.below(detail::ad_reads().size())]);
      continue;
    }
    SlotFiller f;
    f.swear_rate = 0.1;
    out.push_back(generate_sentence(rng, f));
  }
  return out;
}

struct SynthConfig {
  std::size_t num_shows = 2000;   // English shows; each yields one representative episode
  std::uint64_t seed = 1;
  bool inject_shifts = true;
  double extra_episode_rate = 0.15;  // shows with an extra, less-streamed episode
  double short_episode_rate = 0.05;  // shows with an extra, heavily streamed but short episode
  double foreign_show_rate = 0.02;   // additional non-English shows
  double transcript_s = 630.0;       // transcripts cover only the start of the audio
  double mean_rate_wpm = 150.0;
};

struct EpisodeTruth {
  std::string episode_id;
  double latent = 0.0;  // engagement driver in [0, 1)
  bool representative = false;
  std::string genre;
  double speech_rate_wpm = 0.0;
  double pause_s = 0.0;
  int distinct_nouns = 0;
  double swear_rate = 0.0;
};

struct SynthCorpus {
  Corpus corpus;
  std::vector<EpisodeTruth> truth;
};

namespace detail {

inline std::string join_sentence(const TaggedSentence& s) {
  std::string out;
  for (const auto& t : s) {
    if (!out.empty() && t.tag != PosTag::PUNCT) out += ' ';
    out += t.surface;
  }
  return out;
}

inline std::string describe(Rng& rng, const WordList& nouns, std::size_t sentences) {
  std::string out;
  SlotFiller f;
  f.nouns = &nouns;
  for (std::size_t i = 0; i < sentences; ++i) {
    if (!out.empty()) out += ' ';
    out += join_sentence(generate_sentence(rng, f));
  }
  return out;
}

inline std::string promo(Rng& rng, std::string_view handle) {
  const std::string h(handle);
  switch (rng.below(5)) {
    case 0: return "Follow us on Twitter @" + h + ".";
    case 1: return "Visit www." + h + ".com for show notes.";
    case 2: return "Use code " + capitalize(h) + " for 20% off your first order.";
    case 3: return "Subscribe and leave a review!";
    default: return "Support this podcast at patreon.com/" + h + ".";
  }
}

inline const std::vector<std::string>& spanish_sentences() {
  static const std::vector<std::string> s = {
      "En este episodio hablamos de la historia de nuestra ciudad y de sus personajes.",
      "Cada semana entrevistamos a una persona diferente sobre su trabajo y su vida.",
      "Los invitados comparten sus recuerdos de la infancia y de la escuela.",
      "Hablamos de libros, de cine y de las noticias de la semana.",
      "Gracias por escuchar y por compartir el programa con tus amigos.",
  };
  return s;
}

inline double round_ms(double s) { return std::round(s * 1000.0) / 1000.0; }

struct Layout {
  double rate_wpm;
  double pause_s;
  double window_s;
  double transcript_s;
};

// Words of the first `window_s` seconds take exactly window_s - pause_s of
// speech, so the measured rate and non-speech time equal the targets.
inline std::vector<TranscriptWord> lay_out(Rng& rng, const std::vector<TaggedSentence>& sents, const Layout& L) {
  std::vector<std::string> words;
  std::vector<bool> ends_sentence;
  for (const auto& s : sents) {
    for (const auto& t : s) {
      if (t.tag == PosTag::PUNCT && !words.empty()) {
        words.back() += t.surface;
      } else {
        words.push_back(t.surface);
        ends_sentence.push_back(false);
      }
    }
    if (!ends_sentence.empty()) ends_sentence.back() = true;
  }
  const double speech = L.window_s - L.pause_s;
  const auto n_window = static_cast<std::size_t>(std::llround(L.rate_wpm * speech / 60.0));
  if (n_window == 0 || n_window >= words.size()) throw InvariantError("synth: transcript too short for window");
  std::vector<double> dur(words.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    dur[i] = rng.uniform(0.7, 1.3);
    if (i < n_window) sum += dur[i];
  }
  for (auto& d : dur) d *= speech / sum;
  std::size_t boundaries = 0;
  for (std::size_t i = 0; i + 1 < n_window; ++i) boundaries += ends_sentence[i];
  if (boundaries == 0) throw InvariantError("synth: no sentence boundary in window");
  const double pause = L.pause_s / static_cast<double>(boundaries);
  std::vector<TranscriptWord> out;
  double t = 0.0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    // The last word of the window ends exactly at window_s; later words
    // start there plus their own pause.
    if (i >= n_window && t >= L.transcript_s) break;
    const double start = t;
    const double end = i + 1 == n_window ? L.window_s : start + dur[i];
    out.push_back({words[i], round_ms(start), round_ms(end)});
    t = end;
    if (ends_sentence[i] && i + 1 != n_window) t += pause;
  }
  return out;
}

inline std::vector<std::string_view> choose_nouns(Rng& rng, const WordList& pool, int m) {
  std::vector<std::string_view> p(pool.begin(), pool.end());
  rng.shuffle(p);
  p.resize(static_cast<std::size_t>(std::clamp<int>(m, 1, static_cast<int>(p.size()))));
  return p;
}

inline std::uint64_t draw_streams(Rng& rng) {
  return static_cast<std::uint64_t>(std::llround(std::exp(rng.normal(6.5, 1.0)))) + 20;
}

}  // namespace detail

// Stream rate grows with the latent; when shifts are injected the latent
// also raises noun diversity and speech rate and lowers swear-word use.
// Without shifts those three are driven by independent draws with the same
// marginal distribution.
inline SynthCorpus generate_corpus(const SynthConfig& cfg, const EasyWordSet& easy_words) {
  if (cfg.num_shows == 0) throw ConfigError("synth: num_shows must be > 0");
  const auto buckets = swear_buckets(easy_words);
  SynthCorpus out;
  const std::size_t foreign = static_cast<std::size_t>(std::llround(cfg.foreign_show_rate * static_cast<double>(cfg.num_shows)));
  const std::size_t total_shows = cfg.num_shows + foreign;
  char id[32];
  for (std::size_t s = 0; s < total_shows; ++s) {
    Rng rng(derive_seed_n(derive_seed(cfg.seed, "show"), s));
    const bool is_foreign = s >= cfg.num_shows;
    std::snprintf(id, sizeof id, "show%05zu", s);
    const std::string show_id = id;
    const auto& genre = genres()[rng.below(genres().size())];
    const double latent = rng.uniform();
    const double v_rate = cfg.inject_shifts ? latent : rng.uniform();
    const double v_div = cfg.inject_shifts ? latent : rng.uniform();
    const double v_swear = cfg.inject_shifts ? latent : rng.uniform();

    std::string show_desc;
    if (is_foreign) {
      show_desc = detail::spanish_sentences()[rng.below(detail::spanish_sentences().size())];
    } else {
      show_desc = "A podcast about " + std::string(genre.name) + ". " +
                  detail::describe(rng, genre.nouns, 1 + rng.below(2));
      if (rng.bernoulli(0.5)) show_desc += " " + detail::promo(rng, show_id);
    }

    const int extras = (rng.bernoulli(cfg.extra_episode_rate) ? 1 : 0);
    const bool short_extra = rng.bernoulli(cfg.short_episode_rate);
    const std::uint64_t main_streams = detail::draw_streams(rng);

    const int num_eps = 1 + extras + (short_extra ? 1 : 0);
    for (int e = 0; e < num_eps; ++e) {
      const bool representative = e == 0;
      const bool is_short = short_extra && e == num_eps - 1;
      Rng erng(derive_seed(cfg.seed, show_id, std::to_string(e)));
      Episode ep;
      ep.show_id = show_id;
      ep.episode_id = show_id + "-e" + std::to_string(e + 1);
      ep.show_title = detail::capitalize(genre.name) + " Talk " + std::to_string(s);
      ep.show_description = show_desc;
      ep.episode_title = "Episode " + std::to_string(e + 1);
      ep.duration_s = detail::round_ms(is_short ? erng.uniform(300.0, 580.0) : erng.uniform(900.0, 2400.0));
      if (representative) {
        ep.first_streams = main_streams;
      } else if (is_short) {
        ep.first_streams = main_streams * 2 + 5;
      } else {
        ep.first_streams = std::max<std::uint64_t>(main_streams / 2, 1);
      }
      const double rate = std::clamp(0.15 + 0.7 * latent + erng.normal(0.0, 0.01), 0.0, 1.0);
      ep.qualified_streams = std::min<std::uint64_t>(
          ep.first_streams, static_cast<std::uint64_t>(std::llround(rate * static_cast<double>(ep.first_streams))));
      ep.published = "2020-0" + std::to_string(1 + erng.below(9)) + "-1" + std::to_string(erng.below(10)) +
                     "T12:00:00Z";

      EpisodeTruth truth;
      truth.episode_id = ep.episode_id;
      truth.latent = latent;
      truth.representative = representative && !is_foreign;
      truth.genre = std::string(genre.name);

      if (is_foreign) {
        ep.episode_description = detail::spanish_sentences()[erng.below(detail::spanish_sentences().size())];
      } else {
        ep.language_hint = "en";
        ep.episode_description = detail::describe(erng, genre.nouns, 2 + erng.below(2));
        if (erng.bernoulli(0.6)) ep.episode_description += " " + detail::promo(erng, show_id);
      }

      // Transcript
      const double wpm = std::max(60.0, cfg.mean_rate_wpm + 50.0 * (v_rate - 0.5) + erng.normal(0.0, 6.0));
      const double pause = erng.uniform(60.0, 120.0);
      const int m = 6 + static_cast<int>(std::lround(30.0 * v_div));
      const double swear = 0.02 + 0.3 * (1.0 - v_swear);
      const auto nouns = detail::choose_nouns(erng, genre.nouns, m);
      SlotFiller f;
      f.nouns = &nouns;
      f.swear_rate = swear;
      f.swear_buckets = &buckets;
      f.easy = &easy_words;
      std::vector<TaggedSentence> sents;
      std::size_t words = 0;
      const auto needed = static_cast<std::size_t>(wpm * cfg.transcript_s / 60.0) + 40;
      const bool ad_read = erng.bernoulli(0.4);
      const std::size_t ad_at = 3 + erng.below(20);
      const auto spoken = [](const TaggedSentence& ts) {
        return static_cast<std::size_t>(
            std::count_if(ts.begin(), ts.end(), [](const TaggedToken& t) { return t.tag != PosTag::PUNCT; }));
      };
      while (words < needed) {
        if (ad_read && sents.size() == ad_at) {
          for (std::size_t k = 0; k < 2; ++k) {
            sents.push_back(detail::ad_reads()[erng.below(detail::ad_reads().size())]);
            words += spoken(sents.back());
          }
        }
        sents.push_back(generate_sentence(erng, f));
        words += spoken(sents.back());
      }
      ep.words = detail::lay_out(erng, sents, {wpm, pause, std::min(600.0, ep.duration_s),
                                                 std::min(cfg.transcript_s, ep.duration_s)});

      truth.speech_rate_wpm = wpm;
      truth.pause_s = pause;
      truth.distinct_nouns = static_cast<int>(nouns.size());
      truth.swear_rate = swear;
      out.truth.push_back(std::move(truth));
      out.corpus.episodes.push_back(std::move(ep));
    }
  }
  return out;
}

}  // namespace podstyle::synth

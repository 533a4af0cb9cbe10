#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "bisense/corpus.hpp"
#include "bisense/jsonl.hpp"
#include "bisense/util.hpp"

using namespace bisense;
using namespace bisense::corpus;

namespace {

const EmojiTable& table() {
  static EmojiTable t = EmojiTable::load(std::string(BISENSE_DATA_DIR) +
                                         "/emoji_ranges.tsv");
  return t;
}

std::vector<std::string> surfaces(const std::vector<Token>& toks) {
  std::vector<std::string> out;
  for (const Token& t : toks) out.push_back(t.surface);
  return out;
}

const char* kSmile = "\U0001F60A";
const char* kCry = "\U0001F622";

}  // namespace

TEST_SUITE("corpus.tokenize") {
  TEST_CASE("splits embedded emoji into its own token") {
    auto toks = tokenize(std::string("So happy") + kSmile + "today", table());
    CHECK(surfaces(toks) == std::vector<std::string>{"so", "happy", kSmile, "today"});
    CHECK(toks[2].kind == TokenKind::Emoji);
    CHECK(toks[0].kind == TokenKind::Word);
  }

  TEST_CASE("punctuation run is retained as a token") {
    auto toks = tokenize("AWESOME!!", table());
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].surface == "awesome");
    CHECK(toks[0].raw == "AWESOME");  // labeler sees the original casing
    CHECK(toks[1].surface == "!!");
  }

  TEST_CASE("empty input") { CHECK(tokenize("", table()).empty()); }

  TEST_CASE("apostrophes stay inside words") {
    auto toks = tokenize("Don't stop", table());
    CHECK(surfaces(toks) == std::vector<std::string>{"don't", "stop"});
  }

  TEST_CASE("adjacent emojis become separate tokens") {
    auto toks = tokenize(std::string(kSmile) + kCry, table());
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].surface == kSmile);
    CHECK(toks[1].surface == kCry);
  }

  TEST_CASE("variation selectors and zwj are dropped") {
    auto toks = tokenize("❤️ ok", table());
    REQUIRE(toks.size() == 2);
    CHECK(toks[0].surface == "❤");
    CHECK(toks[1].surface == "ok");
  }

  TEST_CASE("round trip: every input emoji appears exactly once") {
    Rng rng(42);
    const std::vector<std::string> words = {"alpha", "Beta", "gamma!", "x9"};
    const std::vector<std::string> emojis = {kSmile, kCry, "\U0001F389"};
    for (int trial = 0; trial < 200; ++trial) {
      std::string text;
      std::map<std::string, int> expected;
      int n = 1 + static_cast<int>(rng.next_index(10));
      for (int i = 0; i < n; ++i) {
        if (rng.next_double() < 0.4) {
          const std::string& e = emojis[rng.next_index(emojis.size())];
          text += e;
          ++expected[e];
        } else {
          text += words[rng.next_index(words.size())];
        }
        if (rng.next_double() < 0.5) text += " ";
      }
      std::map<std::string, int> got;
      for (const Token& t : tokenize(text, table()))
        if (t.kind == TokenKind::Emoji) ++got[t.surface];
      CHECK(got == expected);
    }
  }
}

TEST_SUITE("corpus.preprocess") {
  TEST_CASE("urls are stripped") {
    RawPost raw{"t1", std::string("love this ") + kSmile + " http://t.co/x"};
    PreprocessResult r = preprocess(raw, table(), 1);
    REQUIRE(r.accepted());
    CHECK(surfaces(r.tweet->tokens) ==
          std::vector<std::string>{"love", "this", kSmile});
    CHECK(r.tweet->emojis == std::vector<std::string>{kSmile});
  }

  TEST_CASE("mentions and emails are stripped") {
    RawPost raw{"t2", std::string("hey @bob mail me a@b.com now ") + kSmile};
    PreprocessResult r = preprocess(raw, table(), 1);
    REQUIRE(r.accepted());
    CHECK(surfaces(r.tweet->tokens) ==
          std::vector<std::string>{"hey", "mail", "me", "now", kSmile});
  }

  TEST_CASE("nine words with emoji, min ten -> TooShort") {
    RawPost raw{"t3",
                std::string("one two three four five six seven eight nine ") + kSmile};
    PreprocessResult r = preprocess(raw, table(), 10);
    REQUIRE_FALSE(r.accepted());
    CHECK(*r.reason == RejectReason::TooShort);
  }

  TEST_CASE("ten words without emoji -> NoEmoji") {
    RawPost raw{"t4", "just words no pictures here today at all ten words"};
    PreprocessResult r = preprocess(raw, table(), 10);
    REQUIRE_FALSE(r.accepted());
    CHECK(*r.reason == RejectReason::NoEmoji);
  }

  TEST_CASE("nothing left -> Empty") {
    RawPost raw{"t5", "http://t.co/x"};
    PreprocessResult r = preprocess(raw, table(), 1);
    REQUIRE_FALSE(r.accepted());
    CHECK(*r.reason == RejectReason::Empty);
  }

  TEST_CASE("malformed unicode is an input error, not a rejection") {
    RawPost raw{"t6", std::string("bad \xC3 byte")};
    CHECK_THROWS_AS(preprocess(raw, table(), 1), std::invalid_argument);
  }

  TEST_CASE("punctuation does not count toward min_words") {
    RawPost raw{"t7", std::string("!! ?? ") + kSmile + " word"};
    PreprocessResult r = preprocess(raw, table(), 2);
    REQUIRE_FALSE(r.accepted());
    CHECK(*r.reason == RejectReason::TooShort);
  }
}

TEST_SUITE("corpus.sense_tokens") {
  TEST_CASE("positive label tags every emoji") {
    auto toks = tokenize(std::string("good ") + kSmile, table());
    auto tagged = sense_tokens(toks, Label::Positive);
    REQUIRE(tagged.size() == 2);
    CHECK(tagged[0].kind == TokenKind::Word);
    CHECK(tagged[1].kind == TokenKind::EmojiSense);
    CHECK(*tagged[1].sense == Sense::Positive);
    CHECK(tagged[1].surface == kSmile);
  }

  TEST_CASE("negative label tags the same emoji negatively") {
    auto toks = tokenize(std::string("bad ") + kSmile, table());
    auto tagged = sense_tokens(toks, Label::Negative);
    CHECK(*tagged[1].sense == Sense::Negative);
  }

  TEST_CASE("sense follows the tweet label, not the emoji") {
    auto toks = tokenize(std::string(kSmile) + " " + kCry, table());
    auto tagged = sense_tokens(toks, Label::Positive);
    CHECK(*tagged[0].sense == Sense::Positive);
    CHECK(*tagged[1].sense == Sense::Positive);
  }

  TEST_CASE("unlabeled tweet is a contract violation") {
    Tweet tw;
    tw.id = "x";
    CHECK_THROWS_AS(assign_sense_tokens(tw), std::logic_error);
  }

  TEST_CASE("stripping sense tags recovers the original sequence") {
    Rng rng(7);
    const std::vector<std::string> emojis = {kSmile, kCry};
    for (int trial = 0; trial < 100; ++trial) {
      std::string text;
      int n = 1 + static_cast<int>(rng.next_index(12));
      for (int i = 0; i < n; ++i)
        text += rng.next_double() < 0.3 ? emojis[rng.next_index(2)]
                                        : std::string(" word ");
      auto toks = tokenize(text, table());
      Label lab = rng.next_double() < 0.5 ? Label::Positive : Label::Negative;
      auto tagged = sense_tokens(toks, lab);
      auto back = strip_sense_tokens(tagged);
      REQUIRE(back.size() == toks.size());
      for (size_t i = 0; i < toks.size(); ++i) {
        CHECK(back[i].kind == toks[i].kind);
        CHECK(back[i].surface == toks[i].surface);
        CHECK_FALSE(back[i].sense.has_value());
      }
    }
  }
}

namespace {

Tweet make_tweet(const std::string& id, const std::vector<std::string>& emojis,
                 Label label) {
  Tweet tw;
  tw.id = id;
  tw.label = label;
  Token w;
  w.kind = TokenKind::Word;
  w.surface = w.raw = "word";
  tw.tokens.push_back(w);
  for (const std::string& e : emojis) {
    Token t;
    t.kind = TokenKind::Emoji;
    t.surface = t.raw = e;
    tw.tokens.push_back(t);
    tw.emojis.push_back(e);
  }
  return tw;
}

}  // namespace

TEST_SUITE("corpus.emoji_stats") {
  TEST_CASE("hand tally on a 10-tweet corpus") {
    // enumeration oracle: counts below are tallied by hand over this fixture
    std::vector<Tweet> tweets = {
        make_tweet("1", {kSmile}, Label::Positive),
        make_tweet("2", {kSmile, kSmile}, Label::Positive),
        make_tweet("3", {kCry}, Label::Positive),
        make_tweet("4", {kSmile}, Label::Negative),
        make_tweet("5", {kCry}, Label::Negative),
        make_tweet("6", {kCry, kSmile}, Label::Negative),
        make_tweet("7", {kSmile}, Label::Positive),
        make_tweet("8", {kCry}, Label::Negative),
        make_tweet("9", {kSmile}, Label::Positive),
        make_tweet("10", {kCry, kCry}, Label::Positive),
    };
    EmojiStats stats = emoji_stats(tweets);
    CHECK(stats.per_emoji.at(kSmile).positive == 5);
    CHECK(stats.per_emoji.at(kSmile).negative == 2);
    CHECK(stats.per_emoji.at(kCry).positive == 3);
    CHECK(stats.per_emoji.at(kCry).negative == 3);
    CHECK(stats.total_occurrences() == 13);
  }

  TEST_CASE("emoji only in positive tweets has pos_ratio 1") {
    std::vector<Tweet> tweets = {make_tweet("1", {kSmile}, Label::Positive),
                                 make_tweet("2", {kSmile}, Label::Positive)};
    EmojiStats stats = emoji_stats(tweets);
    CHECK(stats.per_emoji.at(kSmile).pos_ratio() == 1.0);
  }

  TEST_CASE("unlabeled tweet raises") {
    std::vector<Tweet> tweets = {make_tweet("1", {kSmile}, Label::Positive)};
    tweets[0].label.reset();
    CHECK_THROWS_AS(emoji_stats(tweets), std::logic_error);
  }

  TEST_CASE("totals match a brute-force counter on random corpora") {
    Rng rng(99);
    const std::vector<std::string> emojis = {kSmile, kCry, "\U0001F389",
                                             "\U0001F44D"};
    std::vector<Tweet> tweets;
    std::map<std::string, std::pair<int64_t, int64_t>> oracle;
    for (int i = 0; i < 1000; ++i) {
      Label lab = rng.next_double() < 0.5 ? Label::Positive : Label::Negative;
      std::vector<std::string> es;
      int k = 1 + static_cast<int>(rng.next_index(3));
      for (int j = 0; j < k; ++j) {
        const std::string& e = emojis[rng.next_index(emojis.size())];
        es.push_back(e);
        if (lab == Label::Positive)
          ++oracle[e].first;
        else
          ++oracle[e].second;
      }
      tweets.push_back(make_tweet(std::to_string(i), es, lab));
    }
    EmojiStats stats = emoji_stats(tweets);
    REQUIRE(stats.per_emoji.size() == oracle.size());
    for (const auto& [e, counts] : oracle) {
      CHECK(stats.per_emoji.at(e).positive == counts.first);
      CHECK(stats.per_emoji.at(e).negative == counts.second);
    }
  }
}

TEST_SUITE("corpus.filter_emojis") {
  TEST_CASE("boundaries at the threshold") {
    EmojiStats stats;
    stats.per_emoji["a"] = {2001, 1999};  // below threshold in one class
    stats.per_emoji["b"] = {2000, 2000};  // inclusive boundary
    stats.per_emoji["c"] = {5000, 3000};
    auto allowed = filter_emojis(stats, 2000);
    CHECK(allowed == std::vector<std::string>{"b", "c"});
  }

  TEST_CASE("threshold zero keeps everything") {
    EmojiStats stats;
    stats.per_emoji["a"] = {1, 0};
    stats.per_emoji["b"] = {0, 0};
    CHECK(filter_emojis(stats, 0).size() == 2);
  }

  TEST_CASE("tweets with only dropped emojis are excluded downstream") {
    std::vector<Tweet> tweets = {make_tweet("1", {kSmile}, Label::Positive),
                                 make_tweet("2", {kCry}, Label::Positive),
                                 make_tweet("3", {kSmile, kCry}, Label::Negative)};
    std::vector<Tweet> kept = apply_emoji_filter(tweets, {kSmile});
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "1");
    CHECK(kept[1].id == "3");
    CHECK(kept[1].emojis == std::vector<std::string>{kSmile});
  }
}

TEST_SUITE("corpus.split") {
  std::vector<Tweet> corpus_of(int n) {
    std::vector<Tweet> tweets;
    for (int i = 0; i < n; ++i)
      tweets.push_back(make_tweet("id-" + std::to_string(i), {kSmile},
                                  Label::Positive));
    return tweets;
  }

  TEST_CASE("10 tweets at (0.6, 0.1, 0.3) give sizes (6, 1, 3)") {
    auto tweets = corpus_of(10);
    SplitSpec spec{7, {{"pretrain", 0.6}, {"validation", 0.1}, {"test", 0.3}}};
    auto parts = split(tweets, spec);
    CHECK(parts["pretrain"].size() == 6);
    CHECK(parts["validation"].size() == 1);
    CHECK(parts["test"].size() == 3);
  }

  TEST_CASE("same seed twice gives identical assignment") {
    auto tweets = corpus_of(50);
    SplitSpec spec{11, {{"a", 0.5}, {"b", 0.5}}};
    CHECK(split(tweets, spec) == split(tweets, spec));
  }

  TEST_CASE("assignment is independent of input order") {
    auto tweets = corpus_of(30);
    SplitSpec spec{3, {{"a", 0.5}, {"b", 0.5}}};
    auto parts1 = split(tweets, spec);
    std::set<std::string> a_ids;
    for (size_t i : parts1["a"]) a_ids.insert(tweets[i].id);

    std::reverse(tweets.begin(), tweets.end());
    auto parts2 = split(tweets, spec);
    std::set<std::string> a_ids2;
    for (size_t i : parts2["a"]) a_ids2.insert(tweets[i].id);
    CHECK(a_ids == a_ids2);
  }

  TEST_CASE("bad fractions are a config error") {
    auto tweets = corpus_of(10);
    SplitSpec spec{1, {{"a", 0.5}, {"b", 0.6}}};
    CHECK_THROWS_AS(split(tweets, spec), std::invalid_argument);
  }

  TEST_CASE("subsets are disjoint and exhaustive for every seed") {
    auto tweets = corpus_of(37);
    for (uint64_t seed = 0; seed < 20; ++seed) {
      SplitSpec spec{seed, {{"x", 0.6}, {"y", 0.1}, {"z", 0.3}}};
      auto parts = split(tweets, spec);
      std::set<size_t> all;
      size_t total = 0;
      for (const auto& [_, idx] : parts) {
        total += idx.size();
        all.insert(idx.begin(), idx.end());
      }
      CHECK(total == tweets.size());
      CHECK(all.size() == tweets.size());
    }
  }

  TEST_CASE("default split protocols") {
    auto tweets = corpus_of(100);
    auto weak = split(tweets, weak_corpus_split(3));
    CHECK(weak["pretrain"].size() == 60);
    CHECK(weak["validation"].size() == 10);
    CHECK(weak["test"].size() == 30);
    auto human = split(tweets, human_corpus_split(3));
    CHECK(human["finetune"].size() == 60);
    CHECK(human["test"].size() == 40);
  }

  TEST_CASE("remainders go to subsets in declared order") {
    auto tweets = corpus_of(7);
    SplitSpec spec{5, {{"a", 0.6}, {"b", 0.1}, {"c", 0.3}}};
    auto parts = split(tweets, spec);
    // floors are (4, 0, 2); the leftover goes to "a"
    CHECK(parts["a"].size() == 5);
    CHECK(parts["b"].size() == 0);
    CHECK(parts["c"].size() == 2);
  }
}

TEST_SUITE("corpus.jsonl") {
  TEST_CASE("strict mode rejects unknown fields") {
    const std::string path = "/tmp/bisense_test_strict.jsonl";
    {
      std::ofstream out(path);
      out << R"({"id":"a","text":"hi","surprise":1})" << "\n";
    }
    CHECK_NOTHROW(jsonl::read_corpus(path, false));
    CHECK_THROWS_AS(jsonl::read_corpus(path, true), std::runtime_error);
  }

  TEST_CASE("round trip preserves labels and scores") {
    const std::string path = "/tmp/bisense_test_rt.jsonl";
    std::vector<jsonl::Record> records(2);
    records[0].id = "a";
    records[0].text = "hello 😊 world";
    records[0].label = Label::Positive;
    records[0].label_source = LabelSource::Auto;
    records[0].weak_score = 0.85;
    records[1].id = "b";
    records[1].text = "plain";
    jsonl::write_corpus(path, records);
    auto back = jsonl::read_corpus(path, true);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "a");
    CHECK(back[0].text == records[0].text);
    CHECK(*back[0].label == Label::Positive);
    CHECK(back[0].label_source == LabelSource::Auto);
    CHECK(*back[0].weak_score == doctest::Approx(0.85));
    CHECK_FALSE(back[1].label.has_value());
  }

  TEST_CASE("empty id is rejected") {
    const std::string path = "/tmp/bisense_test_emptyid.jsonl";
    {
      std::ofstream out(path);
      out << R"({"id":"","text":"hi"})" << "\n";
    }
    CHECK_THROWS_AS(jsonl::read_corpus(path, false), std::runtime_error);
  }
}

#include <doctest.h>

#include <cmath>

#include "bisense/corpus.hpp"
#include "bisense/util.hpp"
#include "bisense/weaklabel.hpp"

using namespace bisense;
using namespace bisense::weaklabel;
using corpus::Token;
using corpus::TokenKind;

namespace {

Token word(const std::string& raw) {
  Token t;
  t.kind = TokenKind::Word;
  t.raw = raw;
  t.surface = raw;
  for (char& c : t.surface) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return t;
}

Token punct(const std::string& s) {
  Token t;
  t.kind = TokenKind::Word;
  t.raw = s;
  t.surface = s;
  return t;
}

Token emoji(const std::string& s) {
  Token t;
  t.kind = TokenKind::Emoji;
  t.raw = s;
  t.surface = s;
  return t;
}

const Lexicon& shipped() {
  static Lexicon lex = Lexicon::load(std::string(BISENSE_DATA_DIR) + "/lexicon.tsv",
                                     std::string(BISENSE_DATA_DIR) + "/modifiers.tsv");
  return lex;
}

double normalize(double x) { return x / std::sqrt(x * x + 15.0); }

}  // namespace

TEST_SUITE("weaklabel.score") {
  TEST_CASE("empty input scores zero") {
    CHECK(score({}, shipped()) == 0.0);
  }

  TEST_CASE("single word follows the normalization formula") {
    REQUIRE(shipped().valence.at("good") == doctest::Approx(1.9));
    std::vector<Token> toks = {word("good")};
    CHECK(score(toks, shipped()) == doctest::Approx(normalize(1.9)).epsilon(1e-9));
    CHECK(score(toks, shipped()) == doctest::Approx(0.4404).epsilon(1e-3));
  }

  TEST_CASE("negation flips and damps") {
    std::vector<Token> toks = {word("not"), word("good")};
    double s = score(toks, shipped());
    // rule trace: 1.9 * -0.74 = -1.406, then normalized
    CHECK(s == doctest::Approx(normalize(1.9 * kNegationDamp)).epsilon(1e-9));
    CHECK(s == doctest::Approx(-0.341238).epsilon(1e-4));
    CHECK(s < 0);
    CHECK(std::abs(s) < score({{word("good")}}, shipped()));
  }

  TEST_CASE("negator acts within a three-word window") {
    std::vector<Token> in_window = {word("not"), word("really"), word("that"),
                                    word("good")};
    // "really" is also a booster adjacent to... no, adjacent to "that"; only
    // the negation applies to "good" here
    CHECK(score(in_window, shipped()) < 0);

    std::vector<Token> out_of_window = {word("not"), word("a"), word("b"),
                                        word("c"), word("good")};
    CHECK(score(out_of_window, shipped()) > 0);
  }

  TEST_CASE("adjacent booster amplifies in the valence direction") {
    double plain = score({{word("good")}}, shipped());
    std::vector<Token> boosted = {word("very"), word("good")};
    CHECK(score(boosted, shipped()) == doctest::Approx(normalize(1.9 + 0.293)).epsilon(1e-9));
    CHECK(score(boosted, shipped()) > plain);

    std::vector<Token> damped = {word("slightly"), word("good")};
    CHECK(score(damped, shipped()) == doctest::Approx(normalize(1.9 - 0.293)).epsilon(1e-9));

    std::vector<Token> neg_boost = {word("very"), word("bad")};
    CHECK(score(neg_boost, shipped()) ==
          doctest::Approx(normalize(-2.5 - 0.293)).epsilon(1e-9));
  }

  TEST_CASE("two or more trailing exclamation marks add emphasis") {
    double base = score({{word("good")}}, shipped());
    std::vector<Token> one = {word("good"), punct("!")};
    CHECK(score(one, shipped()) == doctest::Approx(base));  // below the >=2 gate

    std::vector<Token> two = {word("good"), punct("!!")};
    CHECK(score(two, shipped()) ==
          doctest::Approx(normalize(1.9 + 2 * kExclaimBoost)).epsilon(1e-9));

    std::vector<Token> many = {word("good"), punct("!!!!")};
    // capped at three
    CHECK(score(many, shipped()) ==
          doctest::Approx(normalize(1.9 + 3 * kExclaimBoost)).epsilon(1e-9));

    std::vector<Token> negative = {word("bad"), punct("!!")};
    CHECK(score(negative, shipped()) ==
          doctest::Approx(normalize(-2.5 - 2 * kExclaimBoost)).epsilon(1e-9));
  }

  TEST_CASE("all-caps sentiment word gains emphasis") {
    CHECK(score({{word("AWESOME")}}, shipped()) ==
          doctest::Approx(normalize(3.1 + kAllCapsBoost)).epsilon(1e-9));
    CHECK(score({{word("TERRIBLE")}}, shipped()) ==
          doctest::Approx(normalize(-2.6 - kAllCapsBoost)).epsilon(1e-9));
    // non-lexicon all-caps words contribute nothing
    CHECK(score({{word("HELLO")}}, shipped()) == 0.0);
  }

  TEST_CASE("emoji and sense tokens are ignored by the scorer") {
    std::vector<Token> with = {word("good"), emoji("\U0001F60A")};
    std::vector<Token> without = {word("good")};
    CHECK(score(with, shipped()) == score(without, shipped()));
  }

  TEST_CASE("neutral text scores zero") {
    std::vector<Token> toks = {word("the"), word("train"), word("arrives")};
    CHECK(score(toks, shipped()) == 0.0);
  }
}

TEST_SUITE("weaklabel.properties") {
  Lexicon tiny_lexicon(double flip) {
    Lexicon lex;
    lex.valence["up"] = flip * 2.0;
    lex.valence["down"] = flip * -1.5;
    lex.valence["top"] = flip * 3.0;
    lex.boosters["very"] = 0.293;
    lex.boosters["barely"] = -0.293;
    lex.negators.insert("not");
    return lex;
  }

  TEST_CASE("antisymmetric under lexicon negation") {
    Lexicon lex = tiny_lexicon(1.0);
    Lexicon neg = tiny_lexicon(-1.0);
    const std::vector<std::string> pool = {"up",   "down", "top",  "very",
                                           "barely", "not",  "blah", "UP",
                                           "TOP",  "x"};
    Rng rng(123);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Token> toks;
      int n = static_cast<int>(rng.next_index(8));
      for (int i = 0; i < n; ++i) toks.push_back(word(pool[rng.next_index(pool.size())]));
      if (rng.next_double() < 0.3) toks.push_back(punct("!!"));
      double a = score(toks, lex);
      double b = score(toks, neg);
      CHECK(a == doctest::Approx(-b).epsilon(1e-12));
    }
  }

  TEST_CASE("score magnitude never reaches one") {
    Rng rng(321);
    Lexicon lex = tiny_lexicon(1.0);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Token> toks;
      int n = static_cast<int>(rng.next_index(30));
      for (int i = 0; i < n; ++i) toks.push_back(word(trial % 2 ? "top" : "down"));
      double s = score(toks, lex);
      CHECK(std::abs(s) < 1.0);
    }
  }

  TEST_CASE("appending a positive word to a nonnegative text is monotone") {
    // generator scope: plain words only (no negators, boosters or trailing
    // punctuation, which rewrite earlier contributions)
    Lexicon lex = tiny_lexicon(1.0);
    const std::vector<std::string> nonneg_pool = {"up", "top", "blah", "x"};
    Rng rng(55);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<Token> toks;
      int n = static_cast<int>(rng.next_index(10));
      for (int i = 0; i < n; ++i)
        toks.push_back(word(nonneg_pool[rng.next_index(nonneg_pool.size())]));
      double before = score(toks, lex);
      REQUIRE(before >= 0);
      toks.push_back(word("up"));
      double after = score(toks, lex);
      CHECK(after >= before);
    }
  }
}

TEST_SUITE("weaklabel.bands") {
  TEST_CASE("paper thresholds") {
    CHECK(weak_label(0.75) == WeakLabel::AutoPositive);
    CHECK(weak_label(-0.75) == WeakLabel::AutoNegative);
    CHECK(weak_label(0.65) == WeakLabel::ManualPool);
    CHECK(weak_label(-0.65) == WeakLabel::ManualPool);
    CHECK(weak_label(-0.30) == WeakLabel::Discard);
    CHECK(weak_label(0.0) == WeakLabel::Discard);
  }

  TEST_CASE("boundary values") {
    CHECK(weak_label(0.60) == WeakLabel::ManualPool);
    CHECK(weak_label(-0.60) == WeakLabel::ManualPool);
    CHECK(weak_label(0.70) == WeakLabel::AutoPositive);
    CHECK(weak_label(-0.70) == WeakLabel::AutoNegative);
    CHECK(weak_label(1.0) == WeakLabel::AutoPositive);
    CHECK(weak_label(-1.0) == WeakLabel::AutoNegative);
    CHECK(weak_label(0.5999999) == WeakLabel::Discard);
    CHECK(weak_label(0.6999999) == WeakLabel::ManualPool);
  }

  TEST_CASE("scores outside the unit interval are contract errors") {
    CHECK_THROWS_AS(weak_label(1.0001), std::domain_error);
    CHECK_THROWS_AS(weak_label(-1.0001), std::domain_error);
    CHECK_THROWS_AS(weak_label(std::nan("")), std::domain_error);
  }

  TEST_CASE("band grid reproduces the policy exactly") {
    for (int i = -100; i <= 100; ++i) {
      double s = i / 100.0;
      WeakLabel w = weak_label(s);
      if (std::abs(s) < 0.60) {
        CHECK(w == WeakLabel::Discard);
      } else if (std::abs(s) < 0.70) {
        CHECK(w == WeakLabel::ManualPool);
      } else {
        CHECK(w == (s > 0 ? WeakLabel::AutoPositive : WeakLabel::AutoNegative));
      }
    }
  }

  TEST_CASE("malformed policies are rejected") {
    WeakLabelPolicy p;
    p.discard_band = 0.8;
    p.auto_threshold = 0.7;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    WeakLabelPolicy q;
    q.discard_band = 0.0;
    CHECK_THROWS_AS(q.validate(), std::invalid_argument);
    WeakLabelPolicy r;
    r.auto_threshold = 1.5;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  }
}

TEST_SUITE("weaklabel.lexicon") {
  TEST_CASE("shipped files load with modifiers") {
    const Lexicon& lex = shipped();
    CHECK(lex.valence.at("good") == doctest::Approx(1.9));
    CHECK(lex.valence.at("bad") == doctest::Approx(-2.5));
    CHECK(lex.boosters.at("very") == doctest::Approx(0.293));
    CHECK(lex.negators.count("not") == 1);
    CHECK(lex.negators.count("dont") == 1);
  }

  TEST_CASE("lookup normalizes casing and apostrophes") {
    CHECK(Lexicon::normalize("Don't") == "dont");
    CHECK(Lexicon::normalize("GOOD") == "good");
    std::vector<Token> toks = {word("don't"), word("good")};
    CHECK(score(toks, shipped()) < 0);  // the contraction negates
  }

  TEST_CASE("missing files raise") {
    CHECK_THROWS_AS(Lexicon::load("/nonexistent/lex.tsv", "/nonexistent/mod.tsv"),
                    std::runtime_error);
  }
}

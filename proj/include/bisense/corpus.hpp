#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bisense::corpus {

enum class TokenKind { Word, Emoji, EmojiSense };
enum class Sense { Positive, Negative };
enum class Label { Positive, Negative };
enum class LabelSource { None, Auto, Human };

struct Token {
  TokenKind kind = TokenKind::Word;
  std::string surface;  // lowercased for words; UTF-8 emoji otherwise
  std::string raw;      // original casing, consumed by the weak labeler
  std::optional<Sense> sense;  // present iff kind == EmojiSense

  bool is_word() const { return kind == TokenKind::Word; }
  bool is_emoji() const { return kind != TokenKind::Word; }
};

struct RawPost {
  std::string id;
  std::string text;
};

struct Tweet {
  std::string id;
  std::vector<Token> tokens;
  std::vector<std::string> emojis;  // emoji surfaces in order of occurrence
  std::optional<Label> label;
  LabelSource label_source = LabelSource::None;
  std::optional<double> weak_score;
};

// Emoji detection is driven by a codepoint-range table shipped as a TSV data
// file, so results do not depend on the host unicode library.
class EmojiTable {
 public:
  static EmojiTable load(const std::string& path);
  static EmojiTable from_ranges(std::vector<std::pair<char32_t, char32_t>> ranges);
  bool is_emoji(char32_t cp) const;

 private:
  std::vector<std::pair<char32_t, char32_t>> ranges_;  // sorted, inclusive
};

std::vector<Token> tokenize(std::string_view text, const EmojiTable& table);

enum class RejectReason { NoEmoji, TooShort, Empty };
std::string_view to_string(RejectReason r);

struct PreprocessResult {
  std::optional<Tweet> tweet;
  std::optional<RejectReason> reason;
  bool accepted() const { return tweet.has_value(); }
};

// Strips urls, @-mentions and emails, tokenizes, and applies the corpus
// filters. Malformed UTF-8 raises std::invalid_argument (an input error, not
// a rejection).
PreprocessResult preprocess(const RawPost& raw, const EmojiTable& table,
                            int min_words);

// Number of word tokens that contain at least one alphanumeric codepoint
// (punctuation runs are tokens but not words).
int word_count(std::span<const Token> tokens);

// Rewrites every Emoji token into an EmojiSense token carrying the tweet
// label; word tokens pass through unchanged.
std::vector<Token> sense_tokens(std::span<const Token> tokens, Label label);

// Same, taking the label from the tweet. Throws std::logic_error when the
// tweet is unlabeled.
std::vector<Token> assign_sense_tokens(const Tweet& tweet);

// Strips sense tags, recovering the pre-assignment token sequence.
std::vector<Token> strip_sense_tokens(std::span<const Token> tokens);

struct EmojiStats {
  struct Entry {
    int64_t positive = 0;
    int64_t negative = 0;
    double pos_ratio() const {
      int64_t total = positive + negative;
      return total > 0 ? static_cast<double>(positive) / total : 0.0;
    }
  };
  std::map<std::string, Entry> per_emoji;
  int64_t total_occurrences() const;
};

// Counts every emoji occurrence, bucketed by tweet label. Throws
// std::logic_error when a tweet is unlabeled.
EmojiStats emoji_stats(std::span<const Tweet> tweets);

// Emojis that occur at least `threshold` times in BOTH positive and negative
// tweets (inclusive comparison). Returned sorted.
std::vector<std::string> filter_emojis(const EmojiStats& stats, int64_t threshold);

// Drops disallowed emoji tokens from each tweet; tweets left with no emoji
// are excluded from the result.
std::vector<Tweet> apply_emoji_filter(std::span<const Tweet> tweets,
                                      const std::vector<std::string>& allowed);

struct SplitSpec {
  uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> fractions;  // must sum to 1
};

// default protocols: weak-labeled corpora pretrain/validate/test at
// 60/10/30, human-labeled corpora fine-tune/test at 60/40
SplitSpec weak_corpus_split(uint64_t seed);
SplitSpec human_corpus_split(uint64_t seed);

// Deterministic partition into named subsets. Assignment depends only on
// (seed, tweet id): tweets are ranked by a per-id hash and cut at boundaries
// computed by flooring each subset size and handing remainders to subsets in
// declared order. Throws std::invalid_argument if fractions do not sum to 1
// within 1e-9.
std::map<std::string, std::vector<size_t>> split(std::span<const Tweet> tweets,
                                                 const SplitSpec& spec);

}  // namespace bisense::corpus

#include "bisense/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "bisense/util.hpp"

namespace bisense::corpus {

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::NoEmoji: return "NoEmoji";
    case RejectReason::TooShort: return "TooShort";
    case RejectReason::Empty: return "Empty";
  }
  return "?";
}

EmojiTable EmojiTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open emoji table: " + path);
  std::vector<std::pair<char32_t, char32_t>> ranges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string lo_s, hi_s;
    if (!std::getline(ls, lo_s, '\t') || !std::getline(ls, hi_s, '\t'))
      throw std::runtime_error("bad emoji table line: " + line);
    char32_t lo = static_cast<char32_t>(std::stoul(lo_s, nullptr, 16));
    char32_t hi = static_cast<char32_t>(std::stoul(hi_s, nullptr, 16));
    if (hi < lo) throw std::runtime_error("bad emoji range: " + line);
    ranges.emplace_back(lo, hi);
  }
  return from_ranges(std::move(ranges));
}

EmojiTable EmojiTable::from_ranges(std::vector<std::pair<char32_t, char32_t>> ranges) {
  EmojiTable t;
  std::sort(ranges.begin(), ranges.end());
  t.ranges_ = std::move(ranges);
  return t;
}

bool EmojiTable::is_emoji(char32_t cp) const {
  auto it = std::upper_bound(ranges_.begin(), ranges_.end(),
                             std::make_pair(cp, U'\x10FFFF'));
  if (it == ranges_.begin()) return false;
  --it;
  return cp >= it->first && cp <= it->second;
}

namespace {

bool is_space_cp(char32_t cp) {
  switch (cp) {
    case U' ': case U'\t': case U'\n': case U'\r': case U'\f': case U'\v':
    case 0x00A0: case 0x2028: case 0x2029: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// joiners and variation selectors contribute nothing tokenwise
bool is_ignorable_cp(char32_t cp) {
  return cp == 0x200D || cp == 0xFE0E || cp == 0xFE0F || cp == 0xFEFF;
}

bool is_word_cp(char32_t cp, const EmojiTable& table) {
  if (cp < 0x80)
    return std::isalnum(static_cast<unsigned char>(cp)) || cp == U'\'';
  return !table.is_emoji(cp) && !is_space_cp(cp) && !is_ignorable_cp(cp);
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::regex& url_re() {
  static const std::regex re(R"((https?://\S+|www\.\S+))", std::regex::icase);
  return re;
}
const std::regex& email_re() {
  static const std::regex re(R"([^\s@]+@[^\s@]+\.[^\s@]+)");
  return re;
}
const std::regex& mention_re() {
  static const std::regex re(R"(@\w+)");
  return re;
}

}  // namespace

std::vector<Token> tokenize(std::string_view text, const EmojiTable& table) {
  std::vector<char32_t> cps = utf8_decode(text);
  std::vector<Token> out;
  std::string word, punct;
  auto flush_word = [&] {
    if (!word.empty()) {
      Token t;
      t.kind = TokenKind::Word;
      t.raw = word;
      t.surface = ascii_lower(word);
      out.push_back(std::move(t));
      word.clear();
    }
  };
  auto flush_punct = [&] {
    if (!punct.empty()) {
      Token t;
      t.kind = TokenKind::Word;
      t.raw = punct;
      t.surface = punct;
      out.push_back(std::move(t));
      punct.clear();
    }
  };
  for (char32_t cp : cps) {
    if (is_ignorable_cp(cp)) continue;
    if (table.is_emoji(cp)) {
      flush_word();
      flush_punct();
      Token t;
      t.kind = TokenKind::Emoji;
      t.surface = utf8_encode(cp);
      t.raw = t.surface;
      out.push_back(std::move(t));
    } else if (is_space_cp(cp)) {
      flush_word();
      flush_punct();
    } else if (is_word_cp(cp, table)) {
      flush_punct();
      utf8_append(cp, word);
    } else {
      flush_word();
      utf8_append(cp, punct);
    }
  }
  flush_word();
  flush_punct();
  return out;
}

int word_count(std::span<const Token> tokens) {
  int n = 0;
  for (const Token& t : tokens) {
    if (t.kind != TokenKind::Word) continue;
    for (unsigned char c : t.surface) {
      if (std::isalnum(c) || c >= 0x80) {
        ++n;
        break;
      }
    }
  }
  return n;
}

PreprocessResult preprocess(const RawPost& raw, const EmojiTable& table,
                            int min_words) {
  utf8_decode(raw.text);  // malformed input is an error, not a rejection
  std::string text = std::regex_replace(raw.text, url_re(), " ");
  text = std::regex_replace(text, email_re(), " ");
  text = std::regex_replace(text, mention_re(), " ");

  PreprocessResult res;
  std::vector<Token> tokens = tokenize(text, table);
  if (tokens.empty()) {
    res.reason = RejectReason::Empty;
    return res;
  }
  bool has_emoji = std::any_of(tokens.begin(), tokens.end(),
                               [](const Token& t) { return t.is_emoji(); });
  if (!has_emoji) {
    res.reason = RejectReason::NoEmoji;
    return res;
  }
  if (word_count(tokens) < min_words) {
    res.reason = RejectReason::TooShort;
    return res;
  }
  Tweet tw;
  tw.id = raw.id;
  for (const Token& t : tokens)
    if (t.kind == TokenKind::Emoji) tw.emojis.push_back(t.surface);
  tw.tokens = std::move(tokens);
  res.tweet = std::move(tw);
  return res;
}

std::vector<Token> sense_tokens(std::span<const Token> tokens, Label label) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) {
    Token u = t;
    if (t.kind == TokenKind::Emoji) {
      u.kind = TokenKind::EmojiSense;
      u.sense = label == Label::Positive ? Sense::Positive : Sense::Negative;
    }
    out.push_back(std::move(u));
  }
  return out;
}

std::vector<Token> assign_sense_tokens(const Tweet& tweet) {
  if (!tweet.label)
    throw std::logic_error("assign_sense_tokens: tweet " + tweet.id +
                           " has no label");
  return sense_tokens(tweet.tokens, *tweet.label);
}

std::vector<Token> strip_sense_tokens(std::span<const Token> tokens) {
  std::vector<Token> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) {
    Token u = t;
    if (t.kind == TokenKind::EmojiSense) {
      u.kind = TokenKind::Emoji;
      u.sense.reset();
    }
    out.push_back(std::move(u));
  }
  return out;
}

int64_t EmojiStats::total_occurrences() const {
  int64_t n = 0;
  for (const auto& [_, e] : per_emoji) n += e.positive + e.negative;
  return n;
}

EmojiStats emoji_stats(std::span<const Tweet> tweets) {
  EmojiStats stats;
  for (const Tweet& tw : tweets) {
    if (!tw.label)
      throw std::logic_error("emoji_stats: tweet " + tw.id + " has no label");
    for (const std::string& e : tw.emojis) {
      auto& entry = stats.per_emoji[e];
      if (*tw.label == Label::Positive)
        ++entry.positive;
      else
        ++entry.negative;
    }
  }
  return stats;
}

std::vector<std::string> filter_emojis(const EmojiStats& stats, int64_t threshold) {
  std::vector<std::string> allowed;
  for (const auto& [emoji, e] : stats.per_emoji)
    if (e.positive >= threshold && e.negative >= threshold)
      allowed.push_back(emoji);
  return allowed;
}

std::vector<Tweet> apply_emoji_filter(std::span<const Tweet> tweets,
                                      const std::vector<std::string>& allowed) {
  std::vector<Tweet> out;
  std::vector<std::string> sorted = allowed;
  std::sort(sorted.begin(), sorted.end());
  for (const Tweet& tw : tweets) {
    Tweet kept;
    kept.id = tw.id;
    kept.label = tw.label;
    kept.label_source = tw.label_source;
    kept.weak_score = tw.weak_score;
    for (const Token& t : tw.tokens) {
      if (t.is_emoji() &&
          !std::binary_search(sorted.begin(), sorted.end(), t.surface))
        continue;
      kept.tokens.push_back(t);
    }
    for (const Token& t : kept.tokens)
      if (t.is_emoji()) kept.emojis.push_back(t.surface);
    if (!kept.emojis.empty()) out.push_back(std::move(kept));
  }
  return out;
}

SplitSpec weak_corpus_split(uint64_t seed) {
  return {seed, {{"pretrain", 0.6}, {"validation", 0.1}, {"test", 0.3}}};
}

SplitSpec human_corpus_split(uint64_t seed) {
  return {seed, {{"finetune", 0.6}, {"test", 0.4}}};
}

std::map<std::string, std::vector<size_t>> split(std::span<const Tweet> tweets,
                                                 const SplitSpec& spec) {
  double sum = 0;
  for (const auto& [_, f] : spec.fractions) sum += f;
  if (spec.fractions.empty() || std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");

  // rank by per-id hash so assignment is independent of input order
  std::vector<std::pair<uint64_t, size_t>> keyed;
  keyed.reserve(tweets.size());
  for (size_t i = 0; i < tweets.size(); ++i)
    keyed.emplace_back(mix_seed(spec.seed, tweets[i].id), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return tweets[a.second].id < tweets[b.second].id;
  });

  size_t n = tweets.size();
  std::vector<size_t> sizes(spec.fractions.size());
  size_t assigned = 0;
  for (size_t k = 0; k < spec.fractions.size(); ++k) {
    sizes[k] = static_cast<size_t>(spec.fractions[k].second * n);
    assigned += sizes[k];
  }
  for (size_t k = 0; assigned < n; k = (k + 1) % sizes.size()) {
    ++sizes[k];
    ++assigned;
  }

  std::map<std::string, std::vector<size_t>> out;
  size_t pos = 0;
  for (size_t k = 0; k < spec.fractions.size(); ++k) {
    std::vector<size_t>& subset = out[spec.fractions[k].first];
    for (size_t j = 0; j < sizes[k]; ++j) subset.push_back(keyed[pos++].second);
    std::sort(subset.begin(), subset.end());
  }
  return out;
}

}  // namespace bisense::corpus

#include "bisense/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <stdexcept>

#include "bisense/util.hpp"

namespace bisense::synth {

const std::vector<std::string>& positive_emojis() {
  static const std::vector<std::string> v = {
      "\U0001F60A", "\U0001F602", "❤", "\U0001F60D", "\U0001F389",
      "\U0001F44D"};
  return v;
}

const std::vector<std::string>& negative_emojis() {
  static const std::vector<std::string> v = {
      "\U0001F622", "\U0001F620", "\U0001F44E", "\U0001F494", "\U0001F62D",
      "\U0001F61E"};
  return v;
}

// every pool word is present in the shipped lexicon with a matching sign
const std::vector<std::string>& positive_words() {
  static const std::vector<std::string> v = {
      "love",     "great",    "amazing", "awesome",   "happy",
      "wonderful", "beautiful", "excellent", "fantastic", "perfect",
      "brilliant", "excited",  "fun",     "glad",      "lovely",
      "sweet",    "best",     "win",     "joy",       "delicious"};
  return v;
}

const std::vector<std::string>& negative_words() {
  static const std::vector<std::string> v = {
      "hate",    "terrible", "awful",         "horrible", "sad",
      "angry",   "worst",    "disappointing", "annoying", "miserable",
      "ugly",    "bad",      "sick",          "pain",     "broken",
      "gross",   "stupid",   "nasty",         "upset",    "fail"};
  return v;
}

const std::vector<std::string>& neutral_words() {
  static const std::vector<std::string> v = {
      "today",   "tomorrow", "morning", "evening", "coffee",  "train",
      "office",  "weather",  "city",    "phone",   "game",    "movie",
      "music",   "people",   "street",  "dinner",  "lunch",   "house",
      "week",    "monday",   "river",   "garden",  "window",  "paper",
      "road",    "table",    "chair",   "door",    "light",   "water",
      "station", "market",   "meeting", "bus",     "kitchen", "book",
      "school",  "park",     "shirt",   "photo"};
  return v;
}

const std::vector<std::string>& topic_words() {
  static const std::vector<std::string> v = {
      "parade", "stadium", "subway", "harbor", "bridge", "castle",
      "desert", "forest",  "island", "valley", "engine", "ticket",
      "camera", "wallet",  "ladder", "mirror", "bucket", "candle"};
  return v;
}

namespace {

// 12 x 18 usage-polarity matrix: row r marks columns {5r .. 5r+8 mod 18} as
// positive. Every row has 9 positive markers and every column exactly 6, so
// a marker word alone carries no sentiment; only the (emoji, word) pair does.
const std::vector<std::vector<bool>>& topic_roles() {
  static const std::vector<std::vector<bool>> roles = [] {
    const size_t rows = 12, cols = topic_words().size();
    std::vector<std::vector<bool>> m(rows, std::vector<bool>(cols, false));
    for (size_t r = 0; r < rows; ++r)
      for (size_t k = 0; k < cols / 2; ++k) m[r][(5 * r + k) % cols] = true;
    return m;
  }();
  return roles;
}

// per-emoji usage consistency spread (mean 1 over each pool):
// agreement_e = 1 - sarcasm_rate * f_e
const double kReliabilitySpread[6] = {0.7, 0.85, 1.0, 1.0, 1.15, 1.3};

}  // namespace

bool topic_is_positive_for(size_t emoji_index, size_t word_index) {
  return topic_roles()[emoji_index][word_index];
}

std::vector<jsonl::Record> synth_corpus(const SynthConfig& config) {
  if (config.n < 10)
    throw std::invalid_argument("synth_corpus: n must be >= 10");
  if (config.sarcasm_rate < 0 || config.sarcasm_rate > 1 ||
      config.ambiguous_rate < 0 || config.ambiguous_rate > 1)
    throw std::invalid_argument("synth_corpus: rates must be in [0, 1]");
  if (config.min_len < 3 || config.max_len < config.min_len)
    throw std::invalid_argument("synth_corpus: bad length bounds");

  Rng rng(config.seed);
  auto pick = [&rng](const std::vector<std::string>& pool) {
    return pool[rng.next_index(pool.size())];
  };

  std::vector<jsonl::Record> out;
  out.reserve(config.n);
  for (int i = 0; i < config.n; ++i) {
    // emoji first, then a sentiment that agrees with its polarity at the
    // emoji's own consistency level
    const size_t pool_size = positive_emojis().size();
    const size_t emoji_idx = rng.next_index(2 * pool_size);
    const bool emoji_is_positive = emoji_idx < pool_size;
    const std::string emoji = emoji_is_positive
                                  ? positive_emojis()[emoji_idx]
                                  : negative_emojis()[emoji_idx - pool_size];
    const double agreement = std::clamp(
        1.0 - config.sarcasm_rate * kReliabilitySpread[emoji_idx % pool_size],
        0.0, 1.0);
    const bool agrees = rng.next_double() < agreement;
    const bool positive = agrees ? emoji_is_positive : !emoji_is_positive;
    const bool ambiguous = rng.next_double() < config.ambiguous_rate;

    const int len = config.min_len +
                    static_cast<int>(rng.next_index(
                        static_cast<uint64_t>(config.max_len - config.min_len + 1)));
    std::vector<std::string> words(static_cast<size_t>(len));
    for (auto& w : words) w = pick(neutral_words());

    // one or two topic markers matching this emoji's usage polarity; in
    // ambiguous tweets they are the only label signal besides the emoji
    int marker_count = 1 + static_cast<int>(rng.next_index(2));
    for (int t = 0; t < marker_count; ++t) {
      size_t w;
      do {
        w = rng.next_index(topic_words().size());
      } while (topic_is_positive_for(emoji_idx, w) != positive);
      words[rng.next_index(words.size())] = topic_words()[w];
    }

    if (!ambiguous) {
      const auto& pool = positive ? positive_words() : negative_words();
      int k = 2 + static_cast<int>(rng.next_index(3));
      for (int s = 0; s < k; ++s)
        words[rng.next_index(words.size())] = pick(pool);
    }

    // occasional shouting, exercised by the labeler's all-caps rule
    if (rng.next_double() < 0.05) {
      std::string& w = words[rng.next_index(words.size())];
      for (char& c : w) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }

    // emojis trail the text more often than not, like real posts
    size_t epos = rng.next_double() < 0.6
                      ? words.size()
                      : rng.next_index(words.size() + 1);

    std::string text;
    for (size_t w = 0; w <= words.size(); ++w) {
      if (w == epos) {
        if (!text.empty()) text += " ";
        text += emoji;
      }
      if (w < words.size()) {
        if (!text.empty()) text += " ";
        text += words[w];
      }
    }

    jsonl::Record r;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "synth-%06d", i);
    r.id = idbuf;
    r.text = std::move(text);
    r.label = positive ? corpus::Label::Positive : corpus::Label::Negative;
    r.label_source = corpus::LabelSource::Human;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bisense::synth

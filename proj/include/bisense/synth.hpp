#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bisense/jsonl.hpp"

namespace bisense::synth {

struct SynthConfig {
  int n = 1000;                 // must be >= 10
  uint64_t seed = 1;
  double sarcasm_rate = 0.3;    // emoji disagrees with the text sentiment
  double ambiguous_rate = 0.25; // text carries conflicting sentiment words
  int min_len = 10;
  int max_len = 16;
};

// Emoji pools with a declared polarity each; an emoji agrees with the tweet
// sentiment at rate (1 - sarcasm_rate) on average, with a per-emoji
// consistency spread shaping a Table-1-style Pos-Ratio profile.
const std::vector<std::string>& positive_emojis();
const std::vector<std::string>& negative_emojis();
const std::vector<std::string>& positive_words();
const std::vector<std::string>& negative_words();
const std::vector<std::string>& neutral_words();

// Valence-free topic markers. Each (emoji, marker) pair has a fixed usage
// polarity, balanced so a marker alone carries no sentiment; only the pair
// does. This is what gives the sense embeddings their per-emoji context
// structure.
const std::vector<std::string>& topic_words();
// true when `word` marks positive usage of the emoji with this global index
// (0..11: positive pool first, then negative pool)
bool topic_is_positive_for(size_t emoji_index, size_t word_index);

// Generates ground-truth-labeled tweets (label_source = human). Clear tweets
// carry 2-4 sentiment words matching the label; ambiguous tweets carry one
// word of each polarity, leaving the emoji as the only reliable signal.
// Throws std::invalid_argument on n < 10 or rates outside [0, 1].
std::vector<jsonl::Record> synth_corpus(const SynthConfig& config);

}  // namespace bisense::synth

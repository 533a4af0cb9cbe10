#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bisense/corpus.hpp"
#include "bisense/embed.hpp"
#include "bisense/nn.hpp"

namespace bisense::models {

enum class ModelVariant {
  T_LSTM,
  E_LSTM,
  BiE_LSTM,
  ATT_E_LSTM,
  WATT_BiE_LSTM,
  MATT_BiE_LSTM,
};

// exact strings are the CLI/config contract
std::string to_string(ModelVariant v);
ModelVariant variant_from_string(const std::string& s);
bool is_attention_variant(ModelVariant v);
bool needs_bisense_table(ModelVariant v);
bool needs_word_table(ModelVariant v);

struct EmbeddingProvider {
  const embed::EmbeddingTable* bisense = nullptr;  // sense-rewritten training
  const embed::EmbeddingTable* word = nullptr;     // plain word-emoji training
};

struct InputItem {
  enum class Kind { Word, Emoji } kind = Kind::Word;
  std::string surface;
  nn::Vec word_vec;                // Word
  nn::Vec emoji_vec;               // Emoji, word-emoji embedding
  nn::Vec sense_pos, sense_neg;    // Emoji, bi-sense embeddings
};

struct TweetInputs {
  std::string id;
  std::vector<InputItem> items;  // original token order
  int n_words = 0;
  int n_emojis = 0;
};

// Resolves the embedding vectors a variant needs. Word vectors come from the
// bi-sense table for bi-sense variants and from the word table otherwise
// (T_LSTM falls back to whichever is present). Unresolvable emojis raise
// embed::MissingSenseError.
TweetInputs prepare_inputs(const corpus::Tweet& tweet,
                           const EmbeddingProvider& tables, ModelVariant v);

// Attention building blocks (Eq.-level ops). The scorer maps two column
// vectors to a scalar logit node; models plug in their MLP, tests may plug in
// hand-built scorers.
using AttentionScorer = std::function<nn::Graph::NodeId(
    nn::Graph&, nn::Graph::NodeId, nn::Graph::NodeId)>;

struct AttentionResult {
  nn::Graph::NodeId weights;   // softmax over the m senses
  nn::Graph::NodeId combined;  // sum_i alpha_i * e_i
};

// weights = softmax_i(scorer(e_i, guide)); combined = convex combination.
// Used word-level (guide = w_t) and tweet-level (guide = final LSTM state).
AttentionResult word_guide_attention(nn::Graph& g,
                                     std::span<const nn::Graph::NodeId> senses,
                                     nn::Graph::NodeId guide,
                                     const AttentionScorer& scorer);

// alpha'_t = softmax over word positions of scorer(w_t, v)
nn::Graph::NodeId word_attention(nn::Graph& g,
                                 std::span<const nn::Graph::NodeId> words,
                                 nn::Graph::NodeId v,
                                 const AttentionScorer& scorer);

struct ModelConfig {
  ModelVariant variant = ModelVariant::T_LSTM;
  int emb_dim = 100;
  int hidden = 64;
  int att_hidden = 0;  // 0 -> emb_dim
  uint64_t seed = 1;
};

class Model {
 public:
  explicit Model(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  // stable order, used by the optimizer and checkpoints
  std::vector<nn::Tensor*> tensors();

  struct Forward {
    nn::Graph::NodeId p = -1;  // probability node, sigmoid output
    // alpha' per word (MATT / ATT_E), exact softmax outputs
    std::vector<double> word_attention;
    // per-word (pos, neg) sense weights (WATT, averaged over emoji
    // occurrences); tweet-level single entry for MATT
    std::vector<std::array<double, 2>> sense_attention;
  };

  // Builds the variant's input sequence and runs LSTM -> dense -> sigmoid.
  // Throws std::invalid_argument when the constructed sequence is empty.
  Forward forward(nn::Graph& g, const TweetInputs& in);

  // forward on a fresh graph, returning the probability
  double predict(const TweetInputs& in);

  // The LSTM input sequence for this variant (exposed for shape tests);
  // fw (optional) receives attention traces.
  std::vector<nn::Graph::NodeId> build_sequence(nn::Graph& g,
                                                const TweetInputs& in,
                                                Forward* fw);

 private:
  ModelConfig cfg_;
  nn::Dense proj_;                 // shared embedding projection
  nn::LstmParams lstm_;            // classifier LSTM
  std::optional<nn::LstmParams> encoder_;  // MATT text encoder
  std::optional<nn::AttentionMlp> att_sense_;
  std::optional<nn::AttentionMlp> att_word_;
  nn::Dense out_;

  nn::Graph::NodeId project(nn::Graph& g, const nn::Vec& raw);
  AttentionScorer sense_scorer();
  AttentionScorer word_scorer();
};

}  // namespace bisense::models

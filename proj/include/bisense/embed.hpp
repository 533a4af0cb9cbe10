#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bisense/corpus.hpp"
#include "bisense/util.hpp"

namespace bisense::embed {

enum class TokenClass : uint8_t { Word = 0, Emoji = 1, SensePos = 2, SenseNeg = 3 };

struct DocToken {
  std::string text;
  TokenClass cls = TokenClass::Word;
};
using Document = std::vector<DocToken>;

inline constexpr const char* kSensePosSuffix = "_pos";
inline constexpr const char* kSenseNegSuffix = "_neg";

// Documents with emojis rewritten to sense tokens; every tweet must be labeled.
std::vector<Document> sense_documents(std::span<const corpus::Tweet> tweets);
// Documents with emojis kept as plain special-word tokens.
std::vector<Document> plain_documents(std::span<const corpus::Tweet> tweets);

struct VocabEntry {
  std::string text;
  TokenClass cls;
  uint64_t count;
};

class Vocab {
 public:
  // Index order: frequency descending, then lexicographic.
  static Vocab build(std::span<const Document> docs, int min_count);
  // entries must already be in index order (used by deserialization)
  static Vocab from_entries(std::vector<VocabEntry> entries, int min_count);

  int32_t find(const std::string& token) const;
  const VocabEntry& entry(int32_t id) const { return entries_[id]; }
  int32_t size() const { return static_cast<int32_t>(entries_.size()); }
  uint64_t total_count() const { return total_count_; }
  int min_count() const { return min_count_; }

 private:
  std::vector<VocabEntry> entries_;
  std::unordered_map<std::string, int32_t> index_;
  uint64_t total_count_ = 0;  // retained occurrences
  int min_count_ = 1;
};

// Character n-gram bucket ids (before the vocab-row offset): the surface is
// wrapped in "<" ">" markers, codepoint n-grams of lengths [nmin, nmax] are
// enumerated and FNV-1a(32)-hashed modulo bucket_count. Emoji and sense
// tokens are atomic and yield no n-grams.
std::vector<uint32_t> char_ngram_buckets(std::string_view surface, TokenClass cls,
                                         int nmin, int nmax, int bucket_count);

struct MissingSenseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int dim = 100;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.05;          // linear decay over planned tokens
  double subsample = 1e-4;   // 0 disables
  int min_count = 1;
  int nmin = 3;
  int nmax = 6;
  int bucket_count = 2'000'000;
  uint64_t seed = 1;
  int threads = 1;           // >1 = hogwild, approximate
};

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  // input rows uniform in [-1/dim, 1/dim], output rows zero
  EmbeddingTable(Vocab vocab, int dim, int bucket_count, int nmin, int nmax,
                 uint64_t seed);

  const Vocab& vocab() const { return vocab_; }
  int dim() const { return dim_; }
  int bucket_count() const { return bucket_count_; }
  int nmin() const { return nmin_; }
  int nmax() const { return nmax_; }
  int64_t input_rows() const { return vocab_.size() + bucket_count_; }

  float* input_row(int64_t r) { return input_.data() + r * dim_; }
  const float* input_row(int64_t r) const { return input_.data() + r * dim_; }
  float* output_row(int32_t r) { return output_.data() + r * dim_; }
  const float* output_row(int32_t r) const { return output_.data() + r * dim_; }

  // row ids composing a token's input vector: own row first, then n-gram rows
  const std::vector<int32_t>& subword_rows(int32_t id) const { return subwords_[id]; }

  // composed input vector = arithmetic mean of the subword rows
  std::vector<double> compose(int32_t id) const;

  // OOV word composed purely from n-gram rows; throws MissingSenseError when
  // nothing composes (unknown emoji / sense token)
  std::vector<double> lookup(const std::string& token) const;
  std::vector<double> lookup_word(const std::string& surface) const;
  std::pair<std::vector<double>, std::vector<double>> lookup_bisense(
      const std::string& emoji) const;
  std::vector<double> lookup_emoji(const std::string& emoji) const;

  void save(const std::string& path) const;
  static EmbeddingTable load(const std::string& path);
  // common "token v1 v2 ..." text format, one line per vocab token
  void export_text(const std::string& path) const;

 private:
  friend double sgd_step(EmbeddingTable&, int32_t, int32_t,
                         std::span<const int32_t>, double);
  Vocab vocab_;
  int dim_ = 0;
  int bucket_count_ = 0;
  int nmin_ = 3;
  int nmax_ = 6;
  std::vector<float> input_;   // (vocab + buckets) x dim, row-major
  std::vector<float> output_;  // vocab x dim, row-major
  std::vector<std::vector<int32_t>> subwords_;
  void build_subwords();
};

// dot(composed input of target, output vector of context)
double score_pair(const EmbeddingTable& table, int32_t target, int32_t context);

// binary logistic loss over one observed pair plus its negatives; applies the
// gradient step to the context/negative output rows and to the target's own
// row plus all its n-gram rows. Returns the loss before the update. Throws
// std::runtime_error on non-finite intermediates.
double sgd_step(EmbeddingTable& table, int32_t target, int32_t context,
                std::span<const int32_t> negatives, double lr);

class UnigramTable {
 public:
  static UnigramTable build(const Vocab& vocab, double exponent = 0.75,
                            size_t table_size = 1'000'000);
  // samples proportional to count^exponent, resampling while == exclude;
  // throws std::runtime_error when no valid negative exists
  int32_t sample(Rng& rng, int32_t exclude) const;

 private:
  std::vector<int32_t> table_;
  int32_t vocab_size_ = 0;
};

struct TrainResult {
  EmbeddingTable table;
  std::vector<double> epoch_loss;  // mean pair loss per epoch
};

TrainResult train(std::span<const Document> docs, const TrainConfig& config);

}  // namespace bisense::embed

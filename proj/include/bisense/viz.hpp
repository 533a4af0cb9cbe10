#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "bisense/corpus.hpp"
#include "bisense/embed.hpp"
#include "bisense/models.hpp"

namespace bisense::viz {

struct AttentionTrace {
  std::string tweet_id;
  models::ModelVariant variant;
  std::vector<std::string> words;
  // alpha' per word for MATT/ATT_E; empty for WATT
  std::vector<double> word_weights;
  // per-word (pos, neg) sense weights for WATT; tweet-level single entry for MATT
  std::vector<std::array<double, 2>> sense_weights;
};

// Runs one forward pass and exports the internal attention weights, with no
// renormalization. Throws std::invalid_argument for non-attention variants.
AttentionTrace attention_trace(models::Model& model,
                               const models::EmbeddingProvider& tables,
                               const corpus::Tweet& tweet);

std::string trace_json(const AttentionTrace& trace);

// (emoji, positive sense - negative sense) per emoji, vocab order.
std::vector<std::pair<std::string, std::vector<double>>> sense_subtraction(
    const embed::EmbeddingTable& table);

struct TsneConfig {
  double perplexity = 5.0;
  int iterations = 1000;
  uint64_t seed = 1;
  double learning_rate = 200.0;
  int exaggeration_iters = 250;  // x12 early exaggeration window
};

struct Projection2D {
  std::vector<std::string> labels;
  std::vector<std::array<double, 2>> points;
  std::string kind;
};

struct TsneResult {
  Projection2D projection;
  std::vector<double> kl_history;  // objective per 10 iterations
};

// Gaussian input affinities with per-point bandwidths calibrated by binary
// search (exposed for tests).
struct Affinities {
  std::vector<std::vector<double>> conditional;  // rows sum to 1
  std::vector<std::vector<double>> joint;        // symmetrized
  std::vector<double> entropy;                   // per-point, nats
};
Affinities gaussian_affinities(std::span<const std::vector<double>> points,
                               double perplexity, double tol = 1e-5);

// Exact O(n^2) t-SNE. Requires n >= 3 * perplexity.
TsneResult tsne(std::span<const std::vector<double>> points,
                std::span<const std::string> labels, const TsneConfig& config,
                const std::string& kind = "");

void write_projection_svg(const std::string& path, const Projection2D& proj);
void write_projection_json(const std::string& path, const Projection2D& proj);

}  // namespace bisense::viz

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bisense/corpus.hpp"
#include "bisense/models.hpp"
#include "bisense/nn.hpp"

namespace bisense::train {

struct Sample {
  models::TweetInputs inputs;
  int label = 0;  // 1 positive, 0 negative
};

// Prepares (inputs, label) pairs for every labeled tweet. Unlabeled tweets
// are skipped, as are tweets whose emojis were frequency-filtered out of the
// embedding vocabulary (counted into *skipped when given).
std::vector<Sample> make_samples(std::span<const corpus::Tweet> tweets,
                                 const models::EmbeddingProvider& tables,
                                 models::ModelVariant v,
                                 size_t* skipped = nullptr);

struct TrainSchedule {
  enum class Phase { Pretrain, FineTune };
  Phase phase = Phase::Pretrain;
  int epochs = 10;
  int batch_size = 32;
  double lr = 1e-3;          // Adam; fine-tune default 1e-4
  int patience = 3;          // epochs without validation improvement
  double clip_norm = 5.0;
  uint64_t seed = 1;
};

struct History {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  int best_epoch = -1;  // 0-based
  double best_val_loss = 0;
};

// Mini-batch BCE training with Adam, gradient clipping, and early stopping on
// validation loss. The model is left at the best-validation checkpoint.
// Deterministic given the seed. Throws std::invalid_argument on an empty
// training set.
History run_phase(models::Model& model, std::span<const Sample> train_set,
                  std::span<const Sample> val_set, const TrainSchedule& schedule);

// mean BCE of the model over a set
double evaluate_loss(models::Model& model, std::span<const Sample> set);

std::vector<double> predict_scores(models::Model& model,
                                   std::span<const Sample> set);

// Positive iff p >= threshold.
corpus::Label classify(double p, double threshold = 0.5);

struct MetricsReport {
  double precision = 0;
  double recall = 0;
  double accuracy = 0;
  double f1 = 0;
  std::optional<double> roc_area;  // empty when labels are single-class
  int64_t tp = 0, fp = 0, tn = 0, fn = 0;
  int64_t n = 0;
  double macro_precision = 0;
  double macro_recall = 0;
  double macro_f1 = 0;
};

// Positive-class precision/recall/F1 plus macro-averaged variants; ROC area
// by the trapezoidal threshold sweep (ties contribute half, matching the
// Mann-Whitney pair count).
MetricsReport metrics(std::span<const double> scores, std::span<const int> labels,
                      double threshold = 0.5);

// Table-2-schema JSON line for one (model, dataset) cell.
std::string metrics_json(const MetricsReport& report, const std::string& model,
                         const std::string& dataset);

}  // namespace bisense::train

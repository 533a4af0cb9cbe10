#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bisense/models.hpp"

namespace bisense::checkpoint {

struct HistorySummary {
  int epochs_run = 0;
  int best_epoch = -1;
  double best_val_loss = 0;
};

struct Checkpoint {
  models::ModelConfig config;
  std::string bisense_digest;  // empty when no table was used
  std::string word_digest;
  HistorySummary history;
};

// Binary format, versioned; save -> load -> save is byte-identical (64-bit
// parameter values preserved exactly).
void save(const std::string& path, models::Model& model, const Checkpoint& meta);

struct Loaded {
  std::unique_ptr<models::Model> model;
  Checkpoint meta;
};

// Throws std::runtime_error on wrong magic, unsupported version, or
// truncation; never returns a partially filled model.
Loaded load(const std::string& path);

}  // namespace bisense::checkpoint

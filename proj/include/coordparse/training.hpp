#pragma once

#include <string>
#include <vector>

#include "coordparse/model.hpp"

namespace coordparse::training {

struct TrainConfig {
  ModelConfig model;
  std::string pretrained_vectors;  // optional path; word embeddings only
  double lr = 0.002;
  double grad_clip = 5.0;  // global norm, <= 0 disables
  int batch_size = 32;
  int max_epochs = 50;
  int patience = 10;  // early stop after this many non-improving evaluations
  double gamma = 2.0;  // adversarial schedule steepness
  std::uint64_t seed = 0;
};

TrainConfig parse_train_config(const std::string& json_text);
TrainConfig load_train_config(const std::string& path);

struct EpochRecord {
  int epoch = 0;
  double tag_loss = 0.0;
  double slot_loss = 0.0;
  double lambda = 0.0;
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
  std::string to_json() const;
};

struct TrainResult {
  TaggerModel<float> model;  // best validation accuracy checkpoint
  std::vector<EpochRecord> log;
  int best_epoch = -1;
  double best_val_accuracy = 0.0;
};

// Epoch loop with per-epoch validation and early stopping on exact-match
// accuracy. Deterministic for a fixed config + seed. Throws on non-finite
// loss, naming the step.
TrainResult train(const TrainConfig& config, const DatasetSplit& dataset);

}  // namespace coordparse::training

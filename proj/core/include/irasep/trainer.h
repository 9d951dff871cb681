// Copyright 2026 The irasep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#ifndef IRASEP_TRAINER_H_
#define IRASEP_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <torch/torch.h>

#include "irasep/loss.h"
#include "irasep/manifest.h"
#include "irasep/metrics.h"
#include "irasep/model.h"

namespace irasep {

struct TrainConfig {
  double lr0 = 5e-4;
  int64_t epochs = 100;
  int64_t batch_size = 12;
  double segment_s = 4.0;
  int64_t patience = 2;
  double lr_factor = 0.5;
  uint64_t seed = 0;
  // Adam; the optimizer type is fixed.
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double grad_clip = 5.0;  // global norm; <= 0 disables
  // Optional caps for desk-scale runs; 0 means unlimited / one full pass.
  int64_t steps_per_epoch = 0;
  int64_t max_steps = 0;

  void Validate() const;
  bool operator==(const TrainConfig&) const = default;
};

nlohmann::json ToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const nlohmann::json& j);

// Plateau rule on the validation history (oldest first): an epoch is "bad"
// when its loss does not improve on the best loss before it. Once `patience`
// consecutive bad epochs accumulate since the last improvement or the last
// reduction, the rate is multiplied by lr_factor and the count restarts.
// Returns the rate to use after the last epoch in `history`.
double LrStep(std::span<const double> history, double current_lr, const TrainConfig& config);

struct CheckpointMeta {
  int64_t epoch = 0;
  int64_t step = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double current_lr = 0.0;
  int64_t best_epoch = 0;
  double best_valid_loss = 0.0;
  std::string config_hash;
};

struct LoadedCheckpoint {
  SpeakerExtractor model{nullptr};
  TrainConfig train;
  CheckpointMeta meta;
  std::vector<std::string> speakers;
};

std::string ConfigHash(const ModelConfig& model, const TrainConfig& train);

// Single file: "IRASEPCK", uint32 version, uint64 header size, JSON header
// (model config, train config, meta, speaker list, dtype), uint64 blob size,
// torch archive of all parameters and buffers.
// meta.config_hash is ignored and recomputed from the configs.
void SaveCheckpoint(const std::filesystem::path& path, SpeakerExtractor& model,
                    const TrainConfig& train, const CheckpointMeta& meta,
                    const std::vector<std::string>& speakers);
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& path);

struct TrainingItem {
  torch::Tensor mixture;    // [T]
  torch::Tensor target;     // [T]
  torch::Tensor reference;  // [Tr]
  int64_t speaker = -1;     // index into the vocabulary, -1 if unseen
};

struct Batch {
  torch::Tensor mixture;    // [B, T]
  torch::Tensor target;     // [B, T]
  torch::Tensor reference;  // [B, Tr], cropped to the shortest in the batch
  torch::Tensor speakers;   // [B] int64, -1 for unknown
};

// Sorted target speaker ids of a manifest.
std::vector<std::string> SpeakerVocabulary(const std::vector<ExampleRecord>& records);

// Cuts every (mixture, target) pair into fixed segments (zero-padded tail)
// and pairs each with its full reference. Segments with a silent target are
// dropped.
std::vector<TrainingItem> LoadTrainingItems(const std::filesystem::path& manifest,
                                            double segment_s,
                                            const std::vector<std::string>& vocabulary,
                                            torch::ScalarType dtype = torch::kFloat);

Batch MakeBatch(std::span<const TrainingItem* const> items);

struct EpochStats {
  int64_t epoch = 0;
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double lr = 0.0;
};

class Trainer {
 public:
  Trainer(const ModelConfig& model_config, const TrainConfig& train_config,
          std::vector<TrainingItem> train_items, std::vector<TrainingItem> valid_items);

  // Next batch in a per-pass shuffled order.
  Batch NextBatch();
  // Forward pass and loss on a batch, in training mode.
  LossTerms ComputeLoss(const Batch& batch);
  // One optimizer step; returns the total loss before the update. Throws
  // Error("diverged") on a non-finite loss.
  double Step();
  // Mean -SI-SDR of the final estimate over the validation items.
  double ValidationLoss();
  // steps_per_epoch steps (default: one pass), validation, lr schedule.
  EpochStats RunEpoch();

  SpeakerExtractor model() const { return model_; }
  double lr() const { return lr_; }
  int64_t steps() const { return steps_; }
  const std::vector<double>& valid_history() const { return valid_history_; }
  const TrainConfig& train_config() const { return train_config_; }

 private:
  void SetLr(double lr);

  ModelConfig model_config_;
  TrainConfig train_config_;
  std::vector<TrainingItem> train_items_;
  std::vector<TrainingItem> valid_items_;
  SpeakerExtractor model_{nullptr};
  std::unique_ptr<torch::optim::Adam> optimizer_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  double lr_ = 0.0;
  int64_t steps_ = 0;
  int64_t epoch_ = 0;
  std::vector<double> valid_history_;
};

struct TrainResult {
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  std::filesystem::path log;
  std::vector<EpochStats> epochs;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Full run: vocabulary from the training manifest, per-epoch validation,
// lr schedule, checkpoints (last.ckpt every epoch, best.ckpt on a new
// minimum validation loss) and train_log.csv in out_dir.
TrainResult Train(const std::filesystem::path& train_manifest,
                  const std::filesystem::path& valid_manifest, ModelConfig model_config,
                  const TrainConfig& train_config, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch = {});

// Full-utterance extraction and scoring of every record.
// Optional extra per-example score (e.g. an external PESQ tool). Returning
// nullopt leaves the column empty for that row.
using ExternalScorer =
    std::function<std::optional<double>(const AudioSegment& estimate, const AudioSegment& target)>;

MetricReport Evaluate(const std::filesystem::path& manifest, SpeakerExtractor& model,
                      int64_t iterations, const std::string& label,
                      const ExternalScorer& scorer = {});

MetricReport Validate(const std::filesystem::path& manifest,
                      const std::filesystem::path& checkpoint);

}  // namespace irasep

#endif  // IRASEP_TRAINER_H_

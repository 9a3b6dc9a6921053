#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dapose/data/source.hpp"
#include "dapose/model/bundle.hpp"
#include "dapose/model/checkpoint.hpp"
#include "dapose/train/losses.hpp"
#include "dapose/util/json_io.hpp"

namespace dapose::train {

struct StageGranularity {
  enum class Kind { PerEpoch, PerNBatches } kind = Kind::PerEpoch;
  int n_batches = 0;  // for PerNBatches
};

struct TrainConfig {
  std::string mode = "fidip";  // "fidip" | "finetune"
  double lr = 0.001;
  int init_batch = 128;
  int init_epochs = 1;
  int batch = 64;
  int epochs = 100;
  double lambda_grl = 0.0005;
  // <= 0 means auto: n_synthetic / n_real of the training set.
  double real_weight = 0.0;
  std::vector<std::string> frozen_blocks = {"res1", "res2", "res3"};
  StageGranularity granularity;
  uint64_t seed = 0;

  void validate() const;
};

struct LossBreakdown {
  std::optional<double> l_pose;
  std::optional<double> l_domain;
  double l_total = 0.0;
  int n_real = 0;
  int n_synthetic = 0;
};

struct StageRecord {
  int64_t cycle = 0;
  std::string stage;
  LossBreakdown losses;
  double lr = 0.0;
  std::map<std::string, std::string> checksums;  // block -> hex

  util::json to_json() const;
  static StageRecord from_json(const util::json& j);
};

struct TrainReport {
  std::vector<StageRecord> records;
  double real_weight_used = 0.0;
  int64_t init_steps = 0;
};

struct InitReport {
  int64_t steps = 0;
  double final_loss = 0.0;
};

// Trains only the domain classifier on the combined set, feature extractor
// and pose head locked (their bytes are untouched). Batches of
// cfg.init_batch for cfg.init_epochs epochs.
InitReport init_domain_classifier(model::PoseModelBundle& bundle,
                                  const data::SampleSource& real_set,
                                  const data::SampleSource& synthetic_set,
                                  const TrainConfig& cfg);

// The circular two-stage loop (plus the plain fine-tuning baseline when
// cfg.mode == "finetune": identical pose-pass schedule and batch streams,
// no domain path). Checkpoints per cycle into out_dir when given; resumes
// from resume_from, refusing a config-hash mismatch with a key-level diff.
class Trainer {
 public:
  Trainer(model::PoseModelBundle& bundle, const data::SampleSource& train_set, TrainConfig cfg,
          std::string config_hash = "", std::string schema_name = "");

  // One Stage-I pass over the given batches: domain classifier only.
  StageRecord run_stage1(int64_t cycle, const std::vector<std::vector<size_t>>& batches,
                         uint64_t stream_seed);
  // One Stage-II pass: pose head + unfrozen encoder blocks through the
  // reversal layer; domain classifier and frozen blocks locked.
  StageRecord run_stage2(int64_t cycle, const std::vector<std::vector<size_t>>& batches,
                         uint64_t stream_seed);

  // Full run. init_real/init_synthetic feed the initialization session; when
  // null, the training set's own real/synthetic halves are used.
  TrainReport run(const std::filesystem::path& out_dir = {},
                  const data::SampleSource* init_real = nullptr,
                  const data::SampleSource* init_synthetic = nullptr,
                  const std::optional<std::filesystem::path>& resume_from = std::nullopt);

  double effective_real_weight() const { return real_weight_; }

 private:
  struct BatchData;
  BatchData load_batch(const std::vector<size_t>& indices, uint64_t stream_seed) const;

  model::PoseModelBundle& bundle_;
  const data::SampleSource& data_;
  TrainConfig cfg_;
  std::string config_hash_;
  std::string schema_name_;
  double real_weight_ = 1.0;
};

}  // namespace dapose::train

#include "dapose/train/trainer.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "dapose/data/sampler.hpp"
#include "dapose/kernels/kernels.hpp"
#include "dapose/nn/optimizer.hpp"
#include "dapose/util/errors.hpp"
#include "dapose/util/rng.hpp"

namespace dapose::train {

using util::ConfigError;
using util::json;

void TrainConfig::validate() const {
  if (mode != "fidip" && mode != "finetune") throw ConfigError("train.mode must be fidip|finetune");
  if (!(lr > 0.0)) throw ConfigError("train.lr must be > 0");
  if (init_batch < 2) throw ConfigError("train.init_batch must be >= 2");
  if (init_epochs < 1) throw ConfigError("train.init_epochs must be >= 1");
  if (batch < 2) throw ConfigError("train.batch must be >= 2");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (lambda_grl < 0.0) throw ConfigError("train.lambda_grl must be >= 0");
  if (real_weight > 0.0 && real_weight < 1.0) {
    throw ConfigError("train.real_weight must be >= 1 (or <= 0 for auto)");
  }
  if (granularity.kind == StageGranularity::Kind::PerNBatches && granularity.n_batches < 1) {
    throw ConfigError("train.stage_granularity per_n_batches requires n >= 1");
  }
}

json StageRecord::to_json() const {
  json j = {{"cycle", cycle}, {"stage", stage}, {"l_total", losses.l_total}, {"lr", lr}};
  if (losses.l_pose) j["l_pose"] = *losses.l_pose;
  if (losses.l_domain) j["l_domain"] = *losses.l_domain;
  j["n_real"] = losses.n_real;
  j["n_synthetic"] = losses.n_synthetic;
  json sums = json::object();
  for (const auto& [block, hex] : checksums) sums[block] = hex;
  j["checksums"] = sums;
  return j;
}

StageRecord StageRecord::from_json(const json& j) {
  StageRecord r;
  r.cycle = j.at("cycle").get<int64_t>();
  r.stage = j.at("stage").get<std::string>();
  r.losses.l_total = j.at("l_total").get<double>();
  if (j.contains("l_pose")) r.losses.l_pose = j["l_pose"].get<double>();
  if (j.contains("l_domain")) r.losses.l_domain = j["l_domain"].get<double>();
  r.losses.n_real = j.value("n_real", 0);
  r.losses.n_synthetic = j.value("n_synthetic", 0);
  r.lr = j.at("lr").get<double>();
  for (const auto& [k, v] : j.value("checksums", json::object()).items()) {
    r.checksums[k] = v.get<std::string>();
  }
  return r;
}

namespace {

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::map<std::string, std::string> block_checksums(const model::PoseModelBundle& bundle) {
  std::map<std::string, std::string> out;
  for (const auto& name : bundle.block_names()) {
    out[name] = hex64(bundle.block_checksum(name));
  }
  return out;
}

}  // namespace

struct Trainer::BatchData {
  std::vector<data::TrainingSample> samples;
  nn::Tensor images;
  nn::Tensor targets;
  std::vector<std::vector<double>> weights;
  std::vector<core::DomainLabel> domains;
};

Trainer::BatchData Trainer::load_batch(const std::vector<size_t>& indices,
                                       uint64_t stream_seed) const {
  BatchData b;
  b.samples.reserve(indices.size());
  for (size_t idx : indices) {
    b.samples.push_back(data_.sample(idx, stream_seed));
  }
  b.images = data::stack_images(b.samples);
  b.targets = data::stack_targets(b.samples);
  for (const auto& s : b.samples) {
    b.weights.push_back(s.target_weights);
    b.domains.push_back(s.domain);
  }
  return b;
}

Trainer::Trainer(model::PoseModelBundle& bundle, const data::SampleSource& train_set,
                 TrainConfig cfg, std::string config_hash, std::string schema_name)
    : bundle_(bundle),
      data_(train_set),
      cfg_(std::move(cfg)),
      config_hash_(std::move(config_hash)),
      schema_name_(std::move(schema_name)) {
  cfg_.validate();
  if (cfg_.real_weight > 0.0) {
    real_weight_ = cfg_.real_weight;
  } else {
    const int nr = data_.count_real();
    const int ns = data_.count_synthetic();
    real_weight_ = (nr > 0 && ns > 0) ? static_cast<double>(ns) / nr : 1.0;
  }
}

InitReport init_domain_classifier(model::PoseModelBundle& bundle,
                                  const data::SampleSource& real_set,
                                  const data::SampleSource& synthetic_set,
                                  const TrainConfig& cfg) {
  cfg.validate();
  const size_t n_real = real_set.size(), n_syn = synthetic_set.size();
  if (n_real + n_syn == 0) throw ConfigError("init_domain_classifier: empty dataset");

  bundle.apply_freeze_mask(model::Stage::Init);
  nn::Adam adam({.lr = cfg.lr});
  const auto trainable = bundle.trainable_params();

  data::HybridBatchSampler sampler(n_real + n_syn, cfg.init_batch,
                                   util::derive_seed(cfg.seed, "init"));
  InitReport report;
  for (int epoch = 0; epoch < cfg.init_epochs; ++epoch) {
    const uint64_t stream = util::derive_seed(cfg.seed, "init-aug", static_cast<uint64_t>(epoch));
    double loss_sum = 0.0;
    size_t n_seen = 0;
    for (const auto& batch : sampler.epoch(static_cast<uint64_t>(epoch))) {
      std::vector<data::TrainingSample> samples;
      samples.reserve(batch.size());
      for (size_t idx : batch) {
        samples.push_back(idx < n_real ? real_set.sample(idx, stream)
                                       : synthetic_set.sample(idx - n_real, stream));
      }
      nn::Tensor images = data::stack_images(samples);
      std::vector<core::DomainLabel> labels;
      for (const auto& s : samples) labels.push_back(s.domain);

      const nn::Tensor features = bundle.forward_features(images);
      model::PoseModelBundle::DomainCache dc;
      const nn::Tensor logits = bundle.forward_domain(features, &dc);
      const auto grad = domain_loss_grad(logits, labels);
      bundle.backward_domain(grad.dlogits, dc, 0.0, /*into_features=*/false);
      adam.step(trainable);
      nn::Adam::zero_grad(trainable);

      loss_sum += grad.value * static_cast<double>(batch.size());
      n_seen += batch.size();
      ++report.steps;
    }
    report.final_loss = loss_sum / static_cast<double>(n_seen);
  }
  return report;
}

StageRecord Trainer::run_stage1(int64_t cycle, const std::vector<std::vector<size_t>>& batches,
                                uint64_t stream_seed) {
  bundle_.apply_freeze_mask(model::Stage::Stage1);
  nn::Adam adam({.lr = cfg_.lr});
  const auto trainable = bundle_.trainable_params();

  double loss_sum = 0.0;
  size_t n_seen = 0;
  StageRecord rec;
  rec.cycle = cycle;
  rec.stage = "STAGE1";
  rec.lr = cfg_.lr;
  for (const auto& batch : batches) {
    BatchData b = load_batch(batch, stream_seed);
    const nn::Tensor features = bundle_.forward_features(b.images);
    model::PoseModelBundle::DomainCache dc;
    const nn::Tensor logits = bundle_.forward_domain(features, &dc);
    const auto grad = domain_loss_grad(logits, b.domains);
    bundle_.backward_domain(grad.dlogits, dc, cfg_.lambda_grl, /*into_features=*/false);
    adam.step(trainable);
    nn::Adam::zero_grad(trainable);

    loss_sum += grad.value * static_cast<double>(batch.size());
    n_seen += batch.size();
    for (auto d : b.domains) {
      ++(d == core::DomainLabel::Real ? rec.losses.n_real : rec.losses.n_synthetic);
    }
  }
  const double l_domain = n_seen ? loss_sum / static_cast<double>(n_seen) : 0.0;
  rec.losses.l_domain = l_domain;
  rec.losses.l_total = l_domain;  // Stage I objective is the domain loss itself
  rec.checksums = block_checksums(bundle_);
  return rec;
}

StageRecord Trainer::run_stage2(int64_t cycle, const std::vector<std::vector<size_t>>& batches,
                                uint64_t stream_seed) {
  bundle_.apply_freeze_mask(model::Stage::Stage2, cfg_.frozen_blocks);
  nn::Adam adam({.lr = cfg_.lr});
  const auto trainable = bundle_.trainable_params();
  const auto all = bundle_.all_params();
  const bool domain_path = cfg_.mode == "fidip";

  double pose_sum = 0.0, domain_sum = 0.0;
  size_t n_seen = 0;
  StageRecord rec;
  rec.cycle = cycle;
  rec.stage = "STAGE2";
  rec.lr = cfg_.lr;
  for (const auto& batch : batches) {
    BatchData b = load_batch(batch, stream_seed);

    model::PoseModelBundle::FeatureCache fc;
    const nn::Tensor features = bundle_.forward_features(b.images, &fc);
    model::PoseModelBundle::PoseCache pc;
    const nn::Tensor heatmaps = bundle_.forward_pose(features, &pc);

    const auto pose_grad = pose_loss_grad(heatmaps, b.targets, b.weights, b.domains, real_weight_);
    nn::Tensor dfeat = bundle_.backward_pose(pose_grad.dpred, pc);

    if (domain_path) {
      model::PoseModelBundle::DomainCache dc;
      const nn::Tensor logits = bundle_.forward_domain(features, &dc);
      if (cfg_.lambda_grl != 0.0) {
        const auto dgrad = domain_loss_grad(logits, b.domains);
        domain_sum += dgrad.value * static_cast<double>(batch.size());
        const nn::Tensor dfeat_domain =
            bundle_.backward_domain(dgrad.dlogits, dc, cfg_.lambda_grl, /*into_features=*/true);
        kernels::ops().axpy(dfeat.numel(), 1.0, dfeat_domain.ptr(), dfeat.ptr());
      } else {
        // Reporting only; exactly the fine-tuning gradient path.
        domain_sum += domain_loss(logits, b.domains) * static_cast<double>(batch.size());
      }
    }

    bundle_.backward_features(dfeat, fc);
    adam.step(trainable);
    nn::Adam::zero_grad(all);

    pose_sum += pose_grad.value * static_cast<double>(batch.size());
    n_seen += batch.size();
    for (auto d : b.domains) {
      ++(d == core::DomainLabel::Real ? rec.losses.n_real : rec.losses.n_synthetic);
    }
  }

  const double l_pose = n_seen ? pose_sum / static_cast<double>(n_seen) : 0.0;
  rec.losses.l_pose = l_pose;
  if (domain_path) {
    const double l_domain = n_seen ? domain_sum / static_cast<double>(n_seen) : 0.0;
    rec.losses.l_domain = l_domain;
    rec.losses.l_total = total_loss(l_pose, l_domain, cfg_.lambda_grl);
  } else {
    rec.losses.l_total = l_pose;
  }
  rec.checksums = block_checksums(bundle_);
  return rec;
}

namespace {

// Sample-count weighted merge of per-chunk records from one stage-epoch.
// Checksums come from the last chunk (the end-of-epoch parameter state).
StageRecord merge_stage_records(const std::vector<StageRecord>& parts) {
  StageRecord out = parts.back();
  double pose_sum = 0.0, domain_sum = 0.0, total_sum = 0.0;
  int n_real = 0, n_synthetic = 0;
  for (const auto& p : parts) {
    const double w = p.losses.n_real + p.losses.n_synthetic;
    if (p.losses.l_pose) pose_sum += *p.losses.l_pose * w;
    if (p.losses.l_domain) domain_sum += *p.losses.l_domain * w;
    total_sum += p.losses.l_total * w;
    n_real += p.losses.n_real;
    n_synthetic += p.losses.n_synthetic;
  }
  const double total_n = std::max(1, n_real + n_synthetic);
  if (out.losses.l_pose) out.losses.l_pose = pose_sum / total_n;
  if (out.losses.l_domain) out.losses.l_domain = domain_sum / total_n;
  out.losses.l_total = total_sum / total_n;
  out.losses.n_real = n_real;
  out.losses.n_synthetic = n_synthetic;
  return out;
}

void write_report(const std::filesystem::path& out_dir, const TrainReport& report) {
  std::ostringstream out;
  for (const auto& rec : report.records) {
    out << rec.to_json().dump() << "\n";
  }
  util::atomic_write(out_dir / "report.jsonl", out.str());
}

std::vector<StageRecord> read_report(const std::filesystem::path& path) {
  std::vector<StageRecord> records;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    records.push_back(StageRecord::from_json(json::parse(line)));
  }
  return records;
}

}  // namespace

TrainReport Trainer::run(const std::filesystem::path& out_dir,
                         const data::SampleSource* init_real,
                         const data::SampleSource* init_synthetic,
                         const std::optional<std::filesystem::path>& resume_from) {
  const bool fidip = cfg_.mode == "fidip";
  TrainReport report;
  report.real_weight_used = real_weight_;

  int64_t start_cycle = 0;
  if (resume_from) {
    const auto meta = model::load_checkpoint(*resume_from, bundle_);
    if (meta.config_hash != config_hash_) {
      throw ConfigError("resume refused: checkpoint was written with config_hash " +
                        meta.config_hash + " but the current config hashes to " + config_hash_ +
                        "; diff the run manifests to see the changed keys");
    }
    start_cycle = meta.cycle + 1;
    if (!out_dir.empty()) {
      for (auto& rec : read_report(out_dir / "report.jsonl")) {
        if (rec.cycle <= meta.cycle) report.records.push_back(std::move(rec));
      }
    }
  } else if (fidip) {
    // Initialization session: domain classifier only, extractor and pose head
    // locked. Falls back to the training set's own domains when no dedicated
    // initialization sets are configured.
    InitReport init;
    if (init_real && init_synthetic) {
      init = init_domain_classifier(bundle_, *init_real, *init_synthetic, cfg_);
    } else {
      init = init_domain_classifier(bundle_, data_, data_, cfg_);
    }
    report.init_steps = init.steps;
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir / "checkpoints");
  }

  const uint64_t seed1 = util::derive_seed(cfg_.seed, "stage1");
  const uint64_t seed2 = util::derive_seed(cfg_.seed, "stage2");
  for (int64_t cycle = start_cycle; cycle < cfg_.epochs; ++cycle) {
    if (cfg_.granularity.kind == StageGranularity::Kind::PerEpoch) {
      if (fidip) {
        data::HybridBatchSampler s1(data_.size(), cfg_.batch, seed1);
        report.records.push_back(run_stage1(cycle, s1.epoch(static_cast<uint64_t>(cycle)),
                                            util::derive_seed(seed1, "aug", cycle)));
      }
      data::HybridBatchSampler s2(data_.size(), cfg_.batch, seed2);
      report.records.push_back(run_stage2(cycle, s2.epoch(static_cast<uint64_t>(cycle)),
                                          util::derive_seed(seed2, "aug", cycle)));
    } else {
      // Interleaved: one epoch stream, chunks of n batches alternating
      // Stage I / Stage II (starting with Stage I), updates applied in chunk
      // order. The fine-tuning baseline consumes the same stream and runs
      // only the Stage-II chunks. Per-chunk records are merged so the report
      // still carries one record per stage-epoch.
      data::HybridBatchSampler sampler(data_.size(), cfg_.batch, seed2);
      const auto epoch_batches = sampler.epoch(static_cast<uint64_t>(cycle));
      const uint64_t stream = util::derive_seed(seed2, "aug", cycle);
      const size_t n = static_cast<size_t>(cfg_.granularity.n_batches);
      std::vector<StageRecord> s1_parts, s2_parts;
      bool stage1_turn = true;
      for (size_t i = 0; i < epoch_batches.size(); i += n) {
        const size_t end = std::min(i + n, epoch_batches.size());
        const std::vector<std::vector<size_t>> chunk(
            epoch_batches.begin() + static_cast<ptrdiff_t>(i),
            epoch_batches.begin() + static_cast<ptrdiff_t>(end));
        if (stage1_turn) {
          if (fidip) s1_parts.push_back(run_stage1(cycle, chunk, stream));
        } else {
          s2_parts.push_back(run_stage2(cycle, chunk, stream));
        }
        stage1_turn = !stage1_turn;
      }
      if (!s1_parts.empty()) report.records.push_back(merge_stage_records(s1_parts));
      if (!s2_parts.empty()) report.records.push_back(merge_stage_records(s2_parts));
    }

    if (!out_dir.empty()) {
      model::CheckpointMeta meta;
      meta.stage = "STAGE2";
      meta.cycle = cycle;
      meta.config_hash = config_hash_;
      meta.schema_name = schema_name_;
      char name[32];
      std::snprintf(name, sizeof(name), "cycle_%04lld.ckpt", static_cast<long long>(cycle));
      save_checkpoint(out_dir / "checkpoints" / name, bundle_, meta);
      save_checkpoint(out_dir / "checkpoints" / "latest.ckpt", bundle_, meta);
      write_report(out_dir, report);
    }
  }
  return report;
}

}  // namespace dapose::train

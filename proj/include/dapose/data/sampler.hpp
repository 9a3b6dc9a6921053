#pragma once

#include <cstdint>
#include <vector>

namespace dapose::data {

// Epoch-permutation batch sampler. Stateless: batches for epoch e are a pure
// function of (seed, e), so an interrupted run resumes on the exact stream.
// Every epoch covers each record exactly once; the final batch may be short.
class HybridBatchSampler {
 public:
  // batch_size >= 2 (util::ConfigError otherwise). batch_size > dataset size
  // degrades to a single smaller batch with a warning on stderr.
  HybridBatchSampler(size_t dataset_size, int batch_size, uint64_t seed);

  std::vector<std::vector<size_t>> epoch(uint64_t epoch_index) const;

  size_t batches_per_epoch() const;
  size_t dataset_size() const { return n_; }

 private:
  size_t n_;
  size_t batch_size_;
  uint64_t seed_;
};

}  // namespace dapose::data

#include "dapose/data/sampler.hpp"

#include <iostream>
#include <numeric>

#include "dapose/util/errors.hpp"
#include "dapose/util/rng.hpp"

namespace dapose::data {

HybridBatchSampler::HybridBatchSampler(size_t dataset_size, int batch_size, uint64_t seed)
    : n_(dataset_size), batch_size_(static_cast<size_t>(batch_size)), seed_(seed) {
  if (batch_size < 2) throw util::ConfigError("batch_size must be >= 2");
  if (dataset_size == 0) throw util::ConfigError("empty dataset");
  if (batch_size_ > n_) {
    std::cerr << "warning: batch_size " << batch_size_ << " exceeds dataset size " << n_
              << "; using one batch of " << n_ << "\n";
  }
}

std::vector<std::vector<size_t>> HybridBatchSampler::epoch(uint64_t epoch_index) const {
  std::vector<size_t> order(n_);
  std::iota(order.begin(), order.end(), size_t{0});
  util::Rng rng(util::derive_seed(seed_, "epoch", epoch_index));
  rng.shuffle(order);

  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < n_; start += batch_size_) {
    const size_t end = std::min(start + batch_size_, n_);
    batches.emplace_back(order.begin() + static_cast<ptrdiff_t>(start),
                         order.begin() + static_cast<ptrdiff_t>(end));
  }
  return batches;
}

size_t HybridBatchSampler::batches_per_epoch() const { return (n_ + batch_size_ - 1) / batch_size_; }

}  // namespace dapose::data

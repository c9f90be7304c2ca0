#pragma once

#include <array>
#include <atomic>
#include <cstdint>

namespace hiercal {

// Cost channels, in simulator-run equivalents. One likelihood evaluation at
// a single lambda charges n runs (one per observation point); one prediction
// charges 1 run per posterior sample per prediction point, since a single
// code run yields every output at once.
enum class RunChannel : int {
  simulator = 0,   // true-code calls (data generation, surrogate training)
  bank = 1,        // importance bank likelihood caching
  chain = 2,       // MCMC target evaluations, including rejected proposals
  prediction = 3,  // per-retained-sample evaluations at prediction points
  other = 4,
};

class EvalCounter {
 public:
  void add(RunChannel ch, std::uint64_t k = 1) {
    counts_[static_cast<int>(ch)].fetch_add(k, std::memory_order_relaxed);
  }
  std::uint64_t count(RunChannel ch) const {
    return counts_[static_cast<int>(ch)].load(std::memory_order_relaxed);
  }
  void reset() {
    for (auto& c : counts_) c.store(0, std::memory_order_relaxed);
  }
  void merge(const EvalCounter& other) {
    for (int i = 0; i < 5; ++i) {
      counts_[i].fetch_add(other.counts_[i].load(std::memory_order_relaxed),
                           std::memory_order_relaxed);
    }
  }

 private:
  std::array<std::atomic<std::uint64_t>, 5> counts_{};
};

}  // namespace hiercal

#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <vector>

#include "uavnav/observe.hpp"

namespace uavnav {

/// One stored step, float32 to halve the footprint. `done` marks terminal
/// transitions only; cap hits keep done=false so the target still bootstraps.
struct Transition {
  std::array<float, kObsDim> obs{};
  std::array<float, 2> action{};
  float reward = 0.0f;
  std::array<float, kObsDim> next_obs{};
  bool done = false;
};

struct ReplayConfig {
  std::size_t temp_capacity = 1000;       // at least the longest episode
  std::size_t success_capacity = 500000;
  std::size_t failure_capacity = 500000;
  double eta = 0.7;  // batch fraction reserved for success-episode steps

  void validate() const;  // throws std::invalid_argument
};

/// Outcome-partitioned experience store. Steps accumulate in a FIFO staging
/// area until their episode ends, then move to the success or failure pool
/// (both fixed-size rings that overwrite the oldest entry). If staging
/// overflows mid-episode, the oldest steps spill into the success pool.
class ReplayPools {
 public:
  explicit ReplayPools(ReplayConfig cfg);

  void push(const Transition& t);
  void finish_episode(bool success);

  std::size_t temp_size() const { return temp_.size(); }
  std::size_t success_size() const { return success_.size(); }
  std::size_t failure_size() const { return failure_.size(); }

  struct Allocation {
    std::size_t n_success = 0;
    std::size_t n_failure = 0;
  };

  /// Failure draw first takes what the success quota min(D_s, floor(eta*B))
  /// leaves free, then successes top the batch up. Fills the batch exactly
  /// whenever D_s + D_f >= B.
  Allocation allocation(std::size_t batch) const;

  bool can_sample(std::size_t batch) const {
    return success_.size() + failure_.size() >= batch;
  }

  /// Uniform with replacement within each pool; success draws come first.
  /// Throws std::logic_error when can_sample(batch) is false.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

 private:
  void push_success(const Transition& t);
  void push_failure(const Transition& t);

  ReplayConfig cfg_;
  std::deque<Transition> temp_;
  std::vector<Transition> success_;
  std::vector<Transition> failure_;
  std::size_t success_next_ = 0;
  std::size_t failure_next_ = 0;
};

}  // namespace uavnav

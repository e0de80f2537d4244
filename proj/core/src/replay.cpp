#include "uavnav/replay.hpp"

#include <algorithm>
#include <stdexcept>

namespace uavnav {

void ReplayConfig::validate() const {
  if (temp_capacity == 0 || success_capacity == 0 || failure_capacity == 0) {
    throw std::invalid_argument("ReplayConfig: capacities must be positive");
  }
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("ReplayConfig: eta must lie in [0, 1]");
  }
}

ReplayPools::ReplayPools(ReplayConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  success_.reserve(std::min<std::size_t>(cfg_.success_capacity, 4096));
  failure_.reserve(std::min<std::size_t>(cfg_.failure_capacity, 4096));
}

void ReplayPools::push_success(const Transition& t) {
  if (success_.size() < cfg_.success_capacity) {
    success_.push_back(t);
  } else {
    success_[success_next_] = t;
  }
  success_next_ = (success_next_ + 1) % cfg_.success_capacity;
}

void ReplayPools::push_failure(const Transition& t) {
  if (failure_.size() < cfg_.failure_capacity) {
    failure_.push_back(t);
  } else {
    failure_[failure_next_] = t;
  }
  failure_next_ = (failure_next_ + 1) % cfg_.failure_capacity;
}

void ReplayPools::push(const Transition& t) {
  if (temp_.size() >= cfg_.temp_capacity) {
    push_success(temp_.front());
    temp_.pop_front();
  }
  temp_.push_back(t);
}

void ReplayPools::finish_episode(bool success) {
  for (const auto& t : temp_) {
    if (success) {
      push_success(t);
    } else {
      push_failure(t);
    }
  }
  temp_.clear();
}

ReplayPools::Allocation ReplayPools::allocation(std::size_t batch) const {
  const std::size_t ds = success_.size();
  const std::size_t df = failure_.size();
  const auto quota = static_cast<std::size_t>(cfg_.eta * static_cast<double>(batch));
  Allocation a;
  a.n_failure = std::min(df, batch - std::min(ds, quota));
  a.n_success = std::min(ds, batch - a.n_failure);
  return a;
}

std::vector<Transition> ReplayPools::sample(std::size_t batch, Rng& rng) const {
  if (!can_sample(batch)) {
    throw std::logic_error("ReplayPools::sample: not enough finished-episode steps");
  }
  const Allocation a = allocation(batch);
  std::vector<Transition> out;
  out.reserve(a.n_success + a.n_failure);
  if (a.n_success > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, success_.size() - 1);
    for (std::size_t i = 0; i < a.n_success; ++i) out.push_back(success_[pick(rng)]);
  }
  if (a.n_failure > 0) {
    std::uniform_int_distribution<std::size_t> pick(0, failure_.size() - 1);
    for (std::size_t i = 0; i < a.n_failure; ++i) out.push_back(failure_[pick(rng)]);
  }
  return out;
}

}  // namespace uavnav

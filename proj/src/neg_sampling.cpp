#include "egin/neg_sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace egin {

NegQueue::NegQueue(EntityType type, std::size_t capacity, double subsample_threshold)
    : type_(type), capacity_(capacity), threshold_(subsample_threshold) {
  if (capacity == 0) throw ConfigError("neg_queue_capacity", "must be > 0");
  if (subsample_threshold < 0.0) throw ConfigError("subsample_threshold", "must be >= 0");
}

bool NegQueue::push(EntityType type, EntityId id, Rng& rng) {
  if (type != type_) {
    throw ContractViolation("push of a " + std::string(to_string(type)) + " id into the " +
                            std::string(to_string(type_)) + " queue");
  }
  if (threshold_ > 0.0) {
    const auto count = ++freq_[id];
    ++total_;
    const double f = static_cast<double>(count) / static_cast<double>(total_);
    const double keep = std::min(1.0, std::sqrt(threshold_ / f));
    if (keep < 1.0 && !std::bernoulli_distribution(keep)(rng)) return false;
  }
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(id);
  return true;
}

void NegQueue::push(EntityType type, EntityId id) {
  if (threshold_ > 0.0) throw ContractViolation("subsampling queue needs an rng for push");
  Rng unused;
  push(type, id, unused);
}

std::size_t sample_negatives_into(const NegQueue& queue, std::size_t n,
                                  std::span<const EntityId> exclude, Rng& rng,
                                  std::vector<EntityId>& out) {
  if (queue.empty()) throw NotWarmedUp("negative queue is empty");
  const auto& buffer = queue.buffer();
  std::uniform_int_distribution<std::size_t> pick(0, buffer.size() - 1);
  std::size_t drawn = 0;
  for (std::size_t attempt = 0; attempt < 10 * n && drawn < n; ++attempt) {
    const EntityId id = buffer[pick(rng)];
    if (std::find(exclude.begin(), exclude.end(), id) != exclude.end()) continue;
    out.push_back(id);
    ++drawn;
  }
  return n - drawn;
}

NegativeDraw sample_negatives(const NegQueue& queue, std::size_t n, std::span<const EntityId> exclude,
                              Rng& rng) {
  NegativeDraw draw;
  draw.ids.reserve(n);
  draw.shortfall = sample_negatives_into(queue, n, exclude, rng, draw.ids);
  return draw;
}

}  // namespace egin

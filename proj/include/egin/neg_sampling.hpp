/**
 * @file neg_sampling.hpp
 * @brief Cross-batch FIFO queues of recently seen ids, one per entity type.
 */
#pragma once

#include <cstddef>
#include <deque>
#include <span>
#include <unordered_map>
#include <vector>

#include "egin/common.hpp"

namespace egin {

class NegQueue {
 public:
  /// subsample_threshold <= 0 disables frequency subsampling.
  NegQueue(EntityType type, std::size_t capacity, double subsample_threshold = 0.0);

  EntityType entity_type() const noexcept { return type_; }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return buffer_.size(); }
  bool empty() const noexcept { return buffer_.empty(); }
  bool subsampling() const noexcept { return threshold_ > 0.0; }

  /// Appends id, evicting the oldest at capacity. With subsampling on the
  /// insert is kept with probability min(1, sqrt(t / f(id))), f being the
  /// id's observed relative frequency including this push. Returns whether
  /// the id was inserted.
  bool push(EntityType type, EntityId id, Rng& rng);

  /// Push without subsampling randomness (subsampling must be off).
  void push(EntityType type, EntityId id);

  const std::deque<EntityId>& buffer() const noexcept { return buffer_; }

 private:
  EntityType type_;
  std::size_t capacity_;
  double threshold_;
  std::deque<EntityId> buffer_;
  std::unordered_map<EntityId, std::size_t> freq_;
  std::size_t total_ = 0;
};

struct NegativeDraw {
  std::vector<EntityId> ids;
  std::size_t shortfall = 0;  // requested minus returned
};

/// Draws n ids uniformly with replacement, rejecting excluded ids, giving up
/// after 10n attempts. Throws NotWarmedUp on an empty queue.
NegativeDraw sample_negatives(const NegQueue& queue, std::size_t n, std::span<const EntityId> exclude,
                              Rng& rng);

/// Appends into `out` instead of allocating; returns the shortfall.
std::size_t sample_negatives_into(const NegQueue& queue, std::size_t n,
                                  std::span<const EntityId> exclude, Rng& rng,
                                  std::vector<EntityId>& out);

}  // namespace egin

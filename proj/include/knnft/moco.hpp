#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "knnft/encoder.hpp"
#include "knnft/losses.hpp"

namespace knnft {

struct QueueEntry {
  Eigen::VectorXd z;  // unit-norm key embedding
  int label = 0;
  std::int64_t anchor_id = 0;  // insertion counter, strictly increasing
};

// FIFO ring of labeled key embeddings (single writer: the trainer).
// Entries are never re-encoded; stale keys age out by eviction.
class ContrastQueue {
 public:
  explicit ContrastQueue(std::size_t capacity);

  // Appends in order, evicting the oldest entries so size() <= capacity().
  // Labels are stamped with fresh anchor ids; callers pass (z, label).
  void push(const std::vector<std::pair<Eigen::VectorXd, int>>& batch);

  // positives = entries with the query's label, negatives = the rest,
  // both in queue order.
  std::pair<std::vector<Key>, std::vector<Key>> partition_by_label(
      int query_label) const;

  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<QueueEntry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<QueueEntry> entries_;
  std::int64_t next_anchor_id_ = 0;
};

// theta_k <- m * theta_k + (1 - m) * theta_q, elementwise.
EncoderParams momentum_update(const EncoderParams& theta_k,
                              const EncoderParams& theta_q, double m);

}  // namespace knnft

#include "knnft/moco.hpp"

#include <stdexcept>

namespace knnft {

ContrastQueue::ContrastQueue(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0)
    throw std::invalid_argument("ContrastQueue: capacity must be positive");
}

void ContrastQueue::push(
    const std::vector<std::pair<Eigen::VectorXd, int>>& batch) {
  if (batch.size() > capacity_)
    throw std::invalid_argument("ContrastQueue: batch larger than capacity");
  for (const auto& [z, label] : batch)
    entries_.push_back({z, label, next_anchor_id_++});
  while (entries_.size() > capacity_) entries_.pop_front();
}

std::pair<std::vector<Key>, std::vector<Key>> ContrastQueue::partition_by_label(
    int query_label) const {
  std::vector<Key> positives, negatives;
  for (const auto& e : entries_) {
    if (e.label == query_label)
      positives.push_back({e.z, e.anchor_id});
    else
      negatives.push_back({e.z, e.anchor_id});
  }
  return {std::move(positives), std::move(negatives)};
}

EncoderParams momentum_update(const EncoderParams& theta_k,
                              const EncoderParams& theta_q, double m) {
  if (m < 0.0 || m > 1.0)
    throw std::invalid_argument("momentum_update: m outside [0,1]");
  if (theta_k.w1.rows() != theta_q.w1.rows() ||
      theta_k.w1.cols() != theta_q.w1.cols() ||
      theta_k.w2.rows() != theta_q.w2.rows() ||
      theta_k.w2.cols() != theta_q.w2.cols())
    throw std::invalid_argument("momentum_update: shape mismatch");
  EncoderParams out;
  out.w1 = m * theta_k.w1 + (1.0 - m) * theta_q.w1;
  out.b1 = m * theta_k.b1 + (1.0 - m) * theta_q.b1;
  out.w2 = m * theta_k.w2 + (1.0 - m) * theta_q.w2;
  out.b2 = m * theta_k.b2 + (1.0 - m) * theta_q.b2;
  return out;
}

}  // namespace knnft

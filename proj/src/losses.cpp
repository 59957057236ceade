#include "knnft/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace knnft {

LossValue cross_entropy(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size())
    throw std::invalid_argument("cross_entropy: label out of range");
  if (!logits.allFinite())
    throw std::runtime_error("cross_entropy: non-finite logits");
  const double mx = logits.maxCoeff();
  const Eigen::VectorXd shifted = logits.array() - mx;
  const Eigen::VectorXd expd = shifted.array().exp();
  const double denom = expd.sum();
  LossValue out;
  out.value = std::log(denom) - shifted[label];
  out.grad = expd / denom;
  out.grad[label] -= 1.0;
  return out;
}

namespace {

// Shared core of every contrastive variant: one positive against the
// negatives, softmax over {k_pos} + negatives with max-subtraction
// (tau = 0.07 overflows raw exponentials).
LossValue single_positive_term(const Eigen::VectorXd& q,
                               const Eigen::VectorXd& k_pos,
                               const std::vector<Key>& negatives, double tau) {
  const std::size_t n = negatives.size();
  Eigen::VectorXd sims(n + 1);
  sims[0] = q.dot(k_pos) / tau;
  for (std::size_t i = 0; i < n; ++i) sims[i + 1] = q.dot(negatives[i].z) / tau;

  const double mx = sims.maxCoeff();
  const Eigen::VectorXd expd = (sims.array() - mx).exp();
  const double denom = expd.sum();

  LossValue out;
  out.value = std::log(denom) + mx - sims[0];
  // grad_q = (sum_i p_i k_i - k_pos) / tau
  Eigen::VectorXd weighted = (expd[0] / denom) * k_pos;
  for (std::size_t i = 0; i < n; ++i)
    weighted += (expd[i + 1] / denom) * negatives[i].z;
  out.grad = (weighted - k_pos) / tau;
  return out;
}

LossValue mean_over_positives(const Eigen::VectorXd& q,
                              const std::vector<Key>& positives,
                              const std::vector<Key>& negatives, double tau) {
  if (positives.empty())
    throw std::invalid_argument("contrastive loss: no positives");
  if (negatives.empty())
    throw std::invalid_argument("contrastive loss: no negatives");
  if (tau <= 0.0) throw std::invalid_argument("contrastive loss: tau <= 0");
  LossValue out;
  out.grad = Eigen::VectorXd::Zero(q.size());
  for (const auto& pos : positives) {
    const LossValue term = single_positive_term(q, pos.z, negatives, tau);
    out.value += term.value;
    out.grad += term.grad;
  }
  const double inv = 1.0 / static_cast<double>(positives.size());
  out.value *= inv;
  out.grad *= inv;
  return out;
}

}  // namespace

LossValue info_nce(const Eigen::VectorXd& q, const Eigen::VectorXd& k_pos,
                   const std::vector<Key>& negatives, double tau) {
  if (negatives.empty()) throw std::invalid_argument("info_nce: no negatives");
  if (tau <= 0.0) throw std::invalid_argument("info_nce: tau <= 0");
  return single_positive_term(q, k_pos, negatives, tau);
}

LossValue supervised_contrastive_full(const Eigen::VectorXd& q,
                                      const std::vector<Key>& positives,
                                      const std::vector<Key>& negatives,
                                      double tau) {
  return mean_over_positives(q, positives, negatives, tau);
}

std::vector<Key> select_positives(const Eigen::VectorXd& q,
                                  const std::vector<Key>& candidates,
                                  int m_most, int m_least) {
  if (m_most < 0 || m_least < 0 || m_most + m_least < 1)
    throw std::invalid_argument("select_positives: need m_most + m_least >= 1");
  if (candidates.empty()) return {};

  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> sim(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    sim[i] = q.dot(candidates[i].z);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return candidates[a].anchor_id < candidates[b].anchor_id;
  });

  const auto n = static_cast<int>(candidates.size());
  std::vector<Key> selected;
  if (n <= m_most + m_least) {
    for (std::size_t idx : order) selected.push_back(candidates[idx]);
    return selected;
  }
  for (int i = 0; i < m_most; ++i) selected.push_back(candidates[order[i]]);
  for (int i = n - m_least; i < n; ++i) selected.push_back(candidates[order[i]]);
  return selected;
}

LossValue supervised_contrastive_selected(const Eigen::VectorXd& q,
                                          const std::vector<Key>& selected,
                                          const std::vector<Key>& negatives,
                                          double tau) {
  return mean_over_positives(q, selected, negatives, tau);
}

CombinedLoss combined_loss(const LossValue& ce, const LossValue& sc,
                           double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("combined_loss: lambda outside [0,1]");
  CombinedLoss out;
  out.value = (1.0 - lambda) * ce.value + lambda * sc.value;
  out.grad_logits = (1.0 - lambda) * ce.grad;
  out.grad_q = lambda * sc.grad;
  return out;
}

}  // namespace knnft

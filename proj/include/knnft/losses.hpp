#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace knnft {

// A key embedding together with the id of the queue/anchor entry it came
// from. Ids drive deterministic tie-breaking in positive selection.
struct Key {
  Eigen::VectorXd z;
  std::int64_t anchor_id = 0;
};

struct LossValue {
  double value = 0.0;
  Eigen::VectorXd grad;  // w.r.t. logits for cross_entropy, w.r.t. q otherwise
};

// value = -log softmax(logits)[label], grad w.r.t. logits.
// Softmax uses max-subtraction for stability.
LossValue cross_entropy(const Eigen::VectorXd& logits, int label);

// Single-positive contrastive loss:
//   -log( exp(q.k+ / tau) / (exp(q.k+ / tau) + sum_i exp(q.k-_i / tau)) )
// Keys receive no gradient; they come from the momentum encoder.
LossValue info_nce(const Eigen::VectorXd& q, const Eigen::VectorXd& k_pos,
                   const std::vector<Key>& negatives, double tau);

// Mean over all positives of the single-positive term. Each term's
// denominator holds only that positive plus all negatives; other positives
// are excluded (the literal form, unlike the Khosla-style variant).
LossValue supervised_contrastive_full(const Eigen::VectorXd& q,
                                      const std::vector<Key>& positives,
                                      const std::vector<Key>& negatives,
                                      double tau);

// Ranks candidates by cosine similarity q.k descending, ties by ascending
// anchor id; returns top m_most plus bottom m_least. When the ranges would
// meet, the most-similar group wins the contested entries; when the
// candidate list is not larger than m_most + m_least, everything is
// selected once.
std::vector<Key> select_positives(const Eigen::VectorXd& q,
                                  const std::vector<Key>& candidates,
                                  int m_most, int m_least);

// The selected-positives loss: mean of single-positive terms over the
// selected set. Reduces to info_nce when one key is selected.
LossValue supervised_contrastive_selected(const Eigen::VectorXd& q,
                                          const std::vector<Key>& selected,
                                          const std::vector<Key>& negatives,
                                          double tau);

// (1 - lambda) * ce + lambda * sc, values and gradients alike. The two
// gradients live in different spaces (logits vs q); they are returned
// separately scaled.
struct CombinedLoss {
  double value = 0.0;
  Eigen::VectorXd grad_logits;
  Eigen::VectorXd grad_q;
};

CombinedLoss combined_loss(const LossValue& ce, const LossValue& sc,
                           double lambda);

}  // namespace knnft

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "knnft/data.hpp"
#include "knnft/encoder.hpp"

namespace knnft {

struct Anchor {
  Eigen::VectorXd z;
  int label = 0;
  std::int64_t example_id = 0;
};

// Encoded training set used for KNN voting at inference. Immutable after
// build; voting is read-only.
struct AnchorIndex {
  std::vector<Anchor> anchors;
  int num_classes = 0;
};

// One anchor per training example, embeddings from the given encoder
// (by default the final query encoder).
AnchorIndex build_anchor_index(const EncoderParams& enc,
                               const Dataset& dataset,
                               const FeaturizerConfig& feat);

// Per-class fraction of the k nearest anchors by cosine similarity, ties
// broken by ascending example id. Unweighted vote, so the result is a
// probability vector. similarity_weighted switches to a vote weighted by
// max(similarity, 0), renormalized (off by default).
Eigen::VectorXd knn_vote(const Eigen::VectorXd& z_q, const AnchorIndex& index,
                         int k, bool similarity_weighted = false);

// s = (1 - phi) * softmax(linear_logits) + phi * knn_dist
Eigen::VectorXd combined_predict(const Eigen::VectorXd& linear_logits,
                                 const Eigen::VectorXd& knn_dist, double phi);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

// Lowest index wins ties.
int argmax(const Eigen::VectorXd& v);

// TSV export: example_id \t label \t z0..z_{d-1}, one row per anchor.
void export_index_tsv(const AnchorIndex& index, const std::string& path);

}  // namespace knnft

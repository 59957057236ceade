#pragma once

#include "knnft/data.hpp"
#include "knnft/encoder.hpp"
#include "knnft/knn.hpp"

namespace knnft {

// Trained classifier bundle for inference: query encoder, linear head,
// anchor index, and the featurizer that produced the training inputs.
// Read-only after construction; safe to share across threads.
struct TextClassifier {
  EncoderParams enc;
  HeadParams head;
  AnchorIndex index;
  FeaturizerConfig feat;
  int knn_k = 10;
  bool similarity_weighted = false;

  // Combined prediction score s at blend weight phi (a probability vector).
  Eigen::VectorXd predict(const std::string& text, double phi) const {
    const Representation rep = encode(enc, featurize(text, feat));
    const Eigen::VectorXd logits = linear_head(head, rep.h);
    const Eigen::VectorXd votes =
        knn_vote(rep.z, index, knn_k, similarity_weighted);
    return combined_predict(logits, votes, phi);
  }
};

}  // namespace knnft

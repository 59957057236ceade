#include "knnft/knn.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace knnft {

AnchorIndex build_anchor_index(const EncoderParams& enc, const Dataset& dataset,
                               const FeaturizerConfig& feat) {
  if (dataset.examples.empty())
    throw std::invalid_argument("build_anchor_index: empty dataset");
  AnchorIndex index;
  index.num_classes = dataset.num_classes;
  index.anchors.reserve(dataset.size());
  for (const auto& ex : dataset.examples) {
    const Representation r = encode(enc, featurize(ex.text, feat));
    index.anchors.push_back({r.z, ex.label, ex.id});
  }
  return index;
}

Eigen::VectorXd knn_vote(const Eigen::VectorXd& z_q, const AnchorIndex& index,
                         int k, bool similarity_weighted) {
  if (k <= 0) throw std::invalid_argument("knn_vote: k must be positive");
  if (static_cast<std::size_t>(k) > index.anchors.size())
    throw std::invalid_argument("knn_vote: k exceeds index size");

  const std::size_t n = index.anchors.size();
  std::vector<double> sim(n);
  for (std::size_t i = 0; i < n; ++i) sim[i] = z_q.dot(index.anchors[i].z);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto better = [&](std::size_t a, std::size_t b) {
    if (sim[a] != sim[b]) return sim[a] > sim[b];
    return index.anchors[a].example_id < index.anchors[b].example_id;
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), better);

  Eigen::VectorXd votes = Eigen::VectorXd::Zero(index.num_classes);
  if (similarity_weighted) {
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      const double w = std::max(sim[order[i]], 0.0);
      votes[index.anchors[order[i]].label] += w;
      total += w;
    }
    if (total > 0.0)
      votes /= total;
    else  // all neighbors at non-positive similarity: fall back to counting
      for (int i = 0; i < k; ++i)
        votes[index.anchors[order[i]].label] += 1.0 / k;
  } else {
    for (int i = 0; i < k; ++i)
      votes[index.anchors[order[i]].label] += 1.0 / k;
  }
  return votes;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd expd = (logits.array() - logits.maxCoeff()).exp();
  return expd / expd.sum();
}

Eigen::VectorXd combined_predict(const Eigen::VectorXd& linear_logits,
                                 const Eigen::VectorXd& knn_dist, double phi) {
  if (phi < 0.0 || phi > 1.0)
    throw std::invalid_argument("combined_predict: phi outside [0,1]");
  return (1.0 - phi) * softmax(linear_logits) + phi * knn_dist;
}

int argmax(const Eigen::VectorXd& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

void export_index_tsv(const AnchorIndex& index, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write index export: " + path);
  char buf[32];
  for (const auto& a : index.anchors) {
    out << a.example_id << '\t' << a.label;
    for (Eigen::Index i = 0; i < a.z.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", a.z[i]);
      out << '\t' << buf;
    }
    out << '\n';
  }
}

}  // namespace knnft

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

// Test-only utilities: independent oracles and finite differences.
// Nothing here may call into the implementation path it is checking.

namespace testutil {

inline std::string data_dir() { return KNNFT_DATA_DIR; }

// Central finite differences of a scalar function at p.
inline Eigen::VectorXd finite_difference(
    const std::function<double(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& p, double step = 1e-5) {
  Eigen::VectorXd grad(p.size());
  Eigen::VectorXd probe = p;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    probe[i] = p[i] + step;
    const double hi = f(probe);
    probe[i] = p[i] - step;
    const double lo = f(probe);
    probe[i] = p[i];
    grad[i] = (hi - lo) / (2.0 * step);
  }
  return grad;
}

// max_i |a_i - b_i| / max(1, |b_i|)
inline double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double denom = std::max(1.0, std::abs(b[i]));
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

inline Eigen::VectorXd random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  return v.normalized();
}

// Brute-force single-positive contrastive loss value, plain loops only.
inline double nce_oracle(const Eigen::VectorXd& q, const Eigen::VectorXd& k_pos,
                         const std::vector<Eigen::VectorXd>& negatives,
                         double tau) {
  double pos_sim = 0.0;
  for (Eigen::Index i = 0; i < q.size(); ++i) pos_sim += q[i] * k_pos[i];
  pos_sim /= tau;
  double denom = std::exp(pos_sim);
  for (const auto& k : negatives) {
    double sim = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) sim += q[i] * k[i];
    denom += std::exp(sim / tau);
  }
  return -std::log(std::exp(pos_sim) / denom);
}

}  // namespace testutil

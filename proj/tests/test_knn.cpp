#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "helpers.hpp"
#include "knnft/knn.hpp"

using namespace knnft;
using testutil::random_unit;

namespace {

AnchorIndex random_index(std::mt19937_64& rng, int n, int dim, int classes) {
  AnchorIndex index;
  index.num_classes = classes;
  for (int i = 0; i < n; ++i)
    index.anchors.push_back(
        {random_unit(rng, dim), static_cast<int>(rng() % classes), i});
  return index;
}

// Full-sort brute force vote, same tie rule, plain loops.
Eigen::VectorXd vote_oracle(const Eigen::VectorXd& z, const AnchorIndex& index,
                            int k) {
  std::vector<std::size_t> order(index.anchors.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double sa = z.dot(index.anchors[a].z);
    const double sb = z.dot(index.anchors[b].z);
    if (sa != sb) return sa > sb;
    return index.anchors[a].example_id < index.anchors[b].example_id;
  });
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(index.num_classes);
  for (int i = 0; i < k; ++i)
    votes[index.anchors[order[i]].label] += 1.0 / k;
  return votes;
}

}  // namespace

TEST_CASE("build_anchor_index: cardinality, determinism, per-example recompute") {
  Dataset d;
  d.num_classes = 2;
  d.examples = {{0, "alpha beta", 0}, {1, "gamma delta", 1}, {2, "alpha", 0}};
  const FeaturizerConfig feat{32, {1, 2}, 0};
  const EncoderParams enc = init_encoder(1, {32, 6, 4});

  const AnchorIndex index = build_anchor_index(enc, d, feat);
  REQUIRE(index.anchors.size() == 3);
  const AnchorIndex again = build_anchor_index(enc, d, feat);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(index.anchors[i].z == again.anchors[i].z);
    const Representation r = encode(enc, featurize(d.examples[i].text, feat));
    CHECK((index.anchors[i].z - r.z).norm() < 1e-12);
    CHECK(index.anchors[i].example_id == d.examples[i].id);
  }
  CHECK_THROWS_AS(build_anchor_index(enc, Dataset{}, feat), std::invalid_argument);
}

TEST_CASE("knn_vote: K=1 is one-hot, K=n on balanced index is the prior") {
  std::mt19937_64 rng(21);
  AnchorIndex index;
  index.num_classes = 2;
  for (int i = 0; i < 10; ++i)
    index.anchors.push_back({random_unit(rng, 4), i % 2, i});

  const Eigen::VectorXd z = index.anchors[3].z;
  const Eigen::VectorXd one = knn_vote(z, index, 1);
  CHECK(one[index.anchors[3].label] == 1.0);

  const Eigen::VectorXd all = knn_vote(random_unit(rng, 4), index, 10);
  CHECK(all[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(all[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("knn_vote errors on bad K") {
  std::mt19937_64 rng(22);
  const AnchorIndex index = random_index(rng, 5, 3, 2);
  CHECK_THROWS_AS(knn_vote(random_unit(rng, 3), index, 0), std::invalid_argument);
  CHECK_THROWS_AS(knn_vote(random_unit(rng, 3), index, 6), std::invalid_argument);
}

TEST_CASE("knn_vote equals the brute-force oracle including ties") {
  std::mt19937_64 rng(23);
  AnchorIndex index = random_index(rng, 200, 4, 3);
  // duplicate some embeddings so ties actually occur
  for (int i = 0; i < 40; ++i) index.anchors[i + 100].z = index.anchors[i].z;

  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::VectorXd z = random_unit(rng, 4);
    for (int k : {1, 5, 10, 50}) {
      const Eigen::VectorXd got = knn_vote(z, index, k);
      const Eigen::VectorXd want = vote_oracle(z, index, k);
      CHECK((got - want).norm() < 1e-12);
    }
  }
}

TEST_CASE("knn_vote is invariant to anchor permutation and query rescaling") {
  std::mt19937_64 rng(24);
  AnchorIndex index = random_index(rng, 60, 4, 3);
  const Eigen::VectorXd z = random_unit(rng, 4);
  const Eigen::VectorXd base = knn_vote(z, index, 7);

  AnchorIndex shuffled = index;
  std::shuffle(shuffled.anchors.begin(), shuffled.anchors.end(), rng);
  CHECK((knn_vote(z, shuffled, 7) - base).norm() < 1e-12);

  CHECK((knn_vote(3.5 * z, index, 7) - base).norm() < 1e-12);
}

TEST_CASE("similarity-weighted vote stays on the simplex") {
  std::mt19937_64 rng(25);
  const AnchorIndex index = random_index(rng, 50, 4, 3);
  const Eigen::VectorXd v = knn_vote(random_unit(rng, 4), index, 10, true);
  CHECK(v.minCoeff() >= 0.0);
  CHECK(v.sum() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("combined_predict endpoints and arithmetic") {
  Eigen::VectorXd logits(2);
  logits << std::log(0.8), std::log(0.2);
  Eigen::VectorXd knn(2);
  knn << 0.6, 0.4;

  const Eigen::VectorXd at0 = combined_predict(logits, knn, 0.0);
  CHECK(at0[0] == doctest::Approx(0.8).epsilon(1e-12));
  const Eigen::VectorXd at1 = combined_predict(logits, knn, 1.0);
  CHECK(at1 == knn);
  const Eigen::VectorXd mid = combined_predict(logits, knn, 0.5);
  CHECK(mid[0] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(mid[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK_THROWS_AS(combined_predict(logits, knn, 1.1), std::invalid_argument);
}

TEST_CASE("combined prediction stays on the probability simplex") {
  std::mt19937_64 rng(26);
  const AnchorIndex index = random_index(rng, 30, 4, 3);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd logits(3);
    for (int i = 0; i < 3; ++i) logits[i] = normal(rng);
    const Eigen::VectorXd knn = knn_vote(random_unit(rng, 4), index, 5);
    const double phi = (trial % 5) * 0.25;
    const Eigen::VectorXd s = combined_predict(logits, knn, phi);
    CHECK(s.minCoeff() >= 0.0);
    CHECK(s.sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("argmax breaks ties toward the lowest class") {
  Eigen::VectorXd v(3);
  v << 0.4, 0.4, 0.2;
  CHECK(argmax(v) == 0);
  v << 0.1, 0.5, 0.5;
  CHECK(argmax(v) == 1);
}

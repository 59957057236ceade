#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "knnft/encoder.hpp"

using namespace knnft;
using testutil::finite_difference;
using testutil::max_rel_error;

TEST_CASE("init_encoder is deterministic with the shape contract") {
  const EncoderParams a = init_encoder(5, {4, 3, 2});
  const EncoderParams b = init_encoder(5, {4, 3, 2});
  CHECK(a.w1 == b.w1);
  CHECK(a.w2 == b.w2);
  CHECK(a.w1.rows() == 3);
  CHECK(a.w1.cols() == 4);
  CHECK(a.w2.rows() == 2);
  CHECK(a.w2.cols() == 3);
  CHECK(a.b1.isZero());
  CHECK(a.b2.isZero());

  const EncoderParams c = init_encoder(6, {4, 3, 2});
  CHECK(a.w1 != c.w1);
}

TEST_CASE("init_encoder weight mean is near zero (seeded-stream statistics)") {
  // 100x100 layer: 10^4 weights uniform on [-L, L], sd = L/sqrt(3).
  const EncoderParams p = init_encoder(11, {100, 100, 2});
  const double limit = std::sqrt(6.0 / 200.0);
  const double se = (limit / std::sqrt(3.0)) / 100.0;  // sd / sqrt(10^4)
  CHECK(std::abs(p.w1.mean()) < 3.0 * se);
  CHECK(p.w1.maxCoeff() <= limit);
  CHECK(p.w1.minCoeff() >= -limit);
}

TEST_CASE("encode normalizes 3-4-5 style") {
  // x = 0 makes the hidden activations zero, so h = b2.
  EncoderParams p;
  p.w1 = Eigen::MatrixXd::Zero(1, 2);
  p.b1 = Eigen::VectorXd::Zero(1);
  p.w2 = Eigen::MatrixXd::Zero(2, 1);
  p.b2 = Eigen::VectorXd(2);
  p.b2 << 3.0, 4.0;
  const Representation r = encode(p, Eigen::VectorXd::Zero(2));
  CHECK(r.h[0] == 3.0);
  CHECK(r.h[1] == 4.0);
  CHECK(r.z[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(r.z[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK_FALSE(r.degenerate);
}

TEST_CASE("encode degenerate fallback is e1") {
  EncoderParams p;
  p.w1 = Eigen::MatrixXd::Zero(2, 2);
  p.b1 = Eigen::VectorXd::Zero(2);
  p.w2 = Eigen::MatrixXd::Zero(3, 2);
  p.b2 = Eigen::VectorXd::Zero(3);
  const Representation r = encode(p, Eigen::VectorXd::Zero(2));
  CHECK(r.degenerate);
  CHECK(r.z[0] == 1.0);
  CHECK(r.z[1] == 0.0);
  CHECK(r.z[2] == 0.0);
}

TEST_CASE("encode rejects dimension mismatch") {
  const EncoderParams p = init_encoder(1, {4, 3, 2});
  CHECK_THROWS_AS(encode(p, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("encode matches a plain-loop forward oracle") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  const EncoderParams p = init_encoder(7, {8, 6, 4});
  Eigen::VectorXd x(8);
  for (int i = 0; i < 8; ++i) x[i] = normal(rng);

  // independent scalar-loop recomputation
  double hidden[6];
  for (int j = 0; j < 6; ++j) {
    double s = p.b1[j];
    for (int i = 0; i < 8; ++i) s += p.w1(j, i) * x[i];
    hidden[j] = std::tanh(s);
  }
  double h[4], norm_sq = 0.0;
  for (int k = 0; k < 4; ++k) {
    double s = p.b2[k];
    for (int j = 0; j < 6; ++j) s += p.w2(k, j) * hidden[j];
    h[k] = s;
    norm_sq += s * s;
  }
  const double norm = std::sqrt(norm_sq);

  const Representation r = encode(p, x);
  for (int k = 0; k < 4; ++k) {
    CHECK(r.h[k] == doctest::Approx(h[k]).epsilon(1e-12));
    CHECK(r.z[k] == doctest::Approx(h[k] / norm).epsilon(1e-12));
  }
  CHECK(std::abs(r.z.norm() - 1.0) < 1e-9);
}

TEST_CASE("linear_head basics and loop oracle") {
  HeadParams head;
  head.w = Eigen::MatrixXd::Zero(3, 4);
  head.b = Eigen::VectorXd(3);
  head.b << 1.0, 2.0, 3.0;
  CHECK(linear_head(head, Eigen::VectorXd::Zero(4)) == head.b);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) head.w(r, c) = normal(rng);
  Eigen::VectorXd h(4);
  for (int i = 0; i < 4; ++i) h[i] = normal(rng);
  const Eigen::VectorXd logits = linear_head(head, h);
  for (int r = 0; r < 3; ++r) {
    double s = head.b[r];
    for (int c = 0; c < 4; ++c) s += head.w(r, c) * h[c];
    CHECK(logits[r] == doctest::Approx(s).epsilon(1e-12));
  }
  CHECK_THROWS_AS(linear_head(head, Eigen::VectorXd::Zero(5)),
                  std::invalid_argument);
}

namespace {

Eigen::VectorXd pack_enc(const EncoderParams& p) {
  Eigen::VectorXd flat(p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size());
  flat << Eigen::Map<const Eigen::VectorXd>(p.w1.data(), p.w1.size()),
      Eigen::Map<const Eigen::VectorXd>(p.b1.data(), p.b1.size()),
      Eigen::Map<const Eigen::VectorXd>(p.w2.data(), p.w2.size()),
      Eigen::Map<const Eigen::VectorXd>(p.b2.data(), p.b2.size());
  return flat;
}

EncoderParams unpack_enc(const Eigen::VectorXd& flat, const EncoderParams& like) {
  EncoderParams p = like;
  Eigen::Index off = 0;
  auto take = [&](double* dst, Eigen::Index n) {
    Eigen::Map<Eigen::VectorXd>(dst, n) = flat.segment(off, n);
    off += n;
  };
  take(p.w1.data(), p.w1.size());
  take(p.b1.data(), p.b1.size());
  take(p.w2.data(), p.w2.size());
  take(p.b2.data(), p.b2.size());
  return p;
}

}  // namespace

TEST_CASE("encoder_backward matches central finite differences") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const EncoderParams p = init_encoder(1000 + trial, {8, 6, 4});
    Eigen::VectorXd x(8), gh(4), gz(4);
    for (int i = 0; i < 8; ++i) x[i] = normal(rng);
    for (int i = 0; i < 4; ++i) gh[i] = normal(rng);
    for (int i = 0; i < 4; ++i) gz[i] = normal(rng);

    // scalar probe loss L = gh.h + gz.z
    auto loss_at = [&](const Eigen::VectorXd& flat) {
      const Representation r = encode(unpack_enc(flat, p), x);
      return gh.dot(r.h) + gz.dot(r.z);
    };
    const Eigen::VectorXd fd =
        finite_difference(loss_at, pack_enc(p), 1e-5);
    const EncoderGrads g = encoder_backward(p, x, gh, gz);
    const Eigen::VectorXd analytic = pack_enc({g.w1, g.b1, g.w2, g.b2});
    worst = std::max(worst, max_rel_error(analytic, fd));

    // and through x
    auto loss_x = [&](const Eigen::VectorXd& xv) {
      const Representation r = encode(p, xv);
      return gh.dot(r.h) + gz.dot(r.z);
    };
    worst = std::max(worst, max_rel_error(g.x, finite_difference(loss_x, x, 1e-5)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
  const EncoderParams p = init_encoder(1, {5, 4, 3});
  Eigen::VectorXd x = Eigen::VectorXd::Ones(5);
  const EncoderGrads g = encoder_backward(p, x, Eigen::VectorXd::Zero(3),
                                          Eigen::VectorXd::Zero(3));
  CHECK(g.w1.isZero());
  CHECK(g.b1.isZero());
  CHECK(g.w2.isZero());
  CHECK(g.b2.isZero());
  CHECK(g.x.isZero());
}

TEST_CASE("normalization Jacobian annihilates the radial direction") {
  // with grad_h = 0 and grad_z = z, the projected gradient through z is zero
  const EncoderParams p = init_encoder(8, {6, 5, 4});
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd x(6);
  for (int i = 0; i < 6; ++i) x[i] = normal(rng);
  const Representation r = encode(p, x);
  const EncoderGrads g =
      encoder_backward(p, x, Eigen::VectorXd::Zero(4), r.z);
  CHECK(g.w1.norm() < 1e-12);
  CHECK(g.w2.norm() < 1e-12);
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  namespace fs = std::filesystem;
  const EncoderParams enc = init_encoder(123, {6, 5, 4});
  HeadParams head;
  head.w = Eigen::MatrixXd::Random(3, 4);
  head.b = Eigen::VectorXd::Random(3);
  const auto path = (fs::temp_directory_path() / "knnft_test.ckpt").string();
  save_checkpoint(path, enc, head, 123, 77);
  const Checkpoint ck = load_checkpoint(path);
  CHECK(ck.enc.w1 == enc.w1);
  CHECK(ck.enc.b1 == enc.b1);
  CHECK(ck.enc.w2 == enc.w2);
  CHECK(ck.enc.b2 == enc.b2);
  CHECK(ck.head.w == head.w);
  CHECK(ck.head.b == head.b);
  CHECK(ck.seed == 123);
  CHECK(ck.step == 77);
  CHECK_THROWS(load_checkpoint(path + ".missing"));
}

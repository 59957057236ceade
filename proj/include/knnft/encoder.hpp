#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

namespace knnft {

struct EncoderDims {
  int input = 0;   // feature dimension D
  int hidden = 0;  // H
  int embed = 0;   // d
};

// One hidden layer with tanh: h = w2 * tanh(w1 * x + b1) + b2.
struct EncoderParams {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // embed x hidden
  Eigen::VectorXd b2;  // embed

  EncoderDims dims() const {
    return {static_cast<int>(w1.cols()), static_cast<int>(w1.rows()),
            static_cast<int>(w2.rows())};
  }
};

struct HeadParams {
  Eigen::MatrixXd w;  // classes x embed
  Eigen::VectorXd b;  // classes
};

// Raw representation h plus its l2-normalized form z. The linear head
// consumes h; the contrastive loss and the KNN space consume z.
struct Representation {
  Eigen::VectorXd h;
  Eigen::VectorXd z;
  bool degenerate = false;  // ||h|| < eps, z fell back to e1
};

inline constexpr double kNormEps = 1e-12;

// Glorot-uniform weights, zero biases, deterministic per (seed, dims).
EncoderParams init_encoder(std::uint64_t seed, const EncoderDims& dims);

HeadParams init_head(std::uint64_t seed, int embed, int num_classes);

Representation encode(const EncoderParams& params, const Eigen::VectorXd& x);

Eigen::VectorXd linear_head(const HeadParams& head, const Eigen::VectorXd& h);

struct EncoderGrads {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::VectorXd x;
};

// Exact analytic backward pass. Upstream gradients arrive on both h and z;
// the normalization Jacobian is (I - z z^T) / ||h||. On the degenerate
// fallback branch the gradient through z is defined as zero.
EncoderGrads encoder_backward(const EncoderParams& params,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& grad_h,
                              const Eigen::VectorXd& grad_z);

// Flat little-endian parameter checkpoint with a small header
// (magic, version, dims, class count, seed, step count).
void save_checkpoint(const std::string& path, const EncoderParams& enc,
                     const HeadParams& head, std::uint64_t seed,
                     std::uint64_t step);

struct Checkpoint {
  EncoderParams enc;
  HeadParams head;
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace knnft

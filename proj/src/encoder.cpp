#include "knnft/encoder.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "knnft/rng.hpp"

namespace knnft {

namespace {

// 53-bit uniform in [0,1). Spelled out instead of uniform_real_distribution
// so the stream is identical across standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd glorot(std::mt19937_64& rng, int rows, int cols) {
  const double limit = std::sqrt(6.0 / (rows + cols));
  Eigen::MatrixXd m(rows, cols);
  // Row-major fill order is part of the deterministic contract.
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = (2.0 * uniform01(rng) - 1.0) * limit;
  return m;
}

}  // namespace

EncoderParams init_encoder(std::uint64_t seed, const EncoderDims& dims) {
  if (dims.input <= 0 || dims.hidden <= 0 || dims.embed <= 0)
    throw std::invalid_argument("init_encoder: dims must be positive");
  auto rng = substream(seed, "encoder_init");
  EncoderParams p;
  p.w1 = glorot(rng, dims.hidden, dims.input);
  p.b1 = Eigen::VectorXd::Zero(dims.hidden);
  p.w2 = glorot(rng, dims.embed, dims.hidden);
  p.b2 = Eigen::VectorXd::Zero(dims.embed);
  return p;
}

HeadParams init_head(std::uint64_t seed, int embed, int num_classes) {
  if (embed <= 0 || num_classes <= 0)
    throw std::invalid_argument("init_head: dims must be positive");
  auto rng = substream(seed, "head_init");
  HeadParams h;
  h.w = glorot(rng, num_classes, embed);
  h.b = Eigen::VectorXd::Zero(num_classes);
  return h;
}

Representation encode(const EncoderParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.w1.cols())
    throw std::invalid_argument("encode: input dimension mismatch");
  Representation r;
  r.h = params.w2 * (params.w1 * x + params.b1).array().tanh().matrix() + params.b2;
  const double norm = r.h.norm();
  if (norm < kNormEps) {
    r.z = Eigen::VectorXd::Zero(r.h.size());
    r.z[0] = 1.0;
    r.degenerate = true;
  } else {
    r.z = r.h / norm;
  }
  return r;
}

Eigen::VectorXd linear_head(const HeadParams& head, const Eigen::VectorXd& h) {
  if (h.size() != head.w.cols())
    throw std::invalid_argument("linear_head: dimension mismatch");
  return head.w * h + head.b;
}

EncoderGrads encoder_backward(const EncoderParams& params,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& grad_h,
                              const Eigen::VectorXd& grad_z) {
  if (x.size() != params.w1.cols())
    throw std::invalid_argument("encoder_backward: input dimension mismatch");
  const Eigen::VectorXd pre = params.w1 * x + params.b1;
  const Eigen::VectorXd a = pre.array().tanh();
  const Eigen::VectorXd h = params.w2 * a + params.b2;
  const double norm = h.norm();

  Eigen::VectorXd dh = grad_h;
  if (norm >= kNormEps) {
    // dz/dh = (I - z z^T) / ||h||
    const Eigen::VectorXd z = h / norm;
    dh += (grad_z - z * z.dot(grad_z)) / norm;
  }
  // degenerate branch: gradient through z is zero by definition

  EncoderGrads g;
  g.w2 = dh * a.transpose();
  g.b2 = dh;
  const Eigen::VectorXd da = params.w2.transpose() * dh;
  const Eigen::VectorXd dpre =
      (da.array() * (1.0 - a.array().square())).matrix();
  g.w1 = dpre * x.transpose();
  g.b1 = dpre;
  g.x = params.w1.transpose() * dpre;
  return g;
}

namespace {

constexpr char kMagic[4] = {'K', 'N', 'F', 'C'};
constexpr std::uint32_t kVersion = 1;

void write_u32(std::ofstream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void write_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void write_doubles(std::ofstream& out, const double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &p[i], 8);
    write_u64(out, bits);
  }
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[i]) << (8 * i);
  return v;
}

std::uint64_t read_u64(std::ifstream& in) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return v;
}

void read_doubles(std::ifstream& in, double* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t bits = read_u64(in);
    std::memcpy(&p[i], &bits, 8);
  }
}

}  // namespace

void save_checkpoint(const std::string& path, const EncoderParams& enc,
                     const HeadParams& head, std::uint64_t seed,
                     std::uint64_t step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  write_u32(out, kVersion);
  const auto dims = enc.dims();
  write_u32(out, static_cast<std::uint32_t>(dims.input));
  write_u32(out, static_cast<std::uint32_t>(dims.hidden));
  write_u32(out, static_cast<std::uint32_t>(dims.embed));
  write_u32(out, static_cast<std::uint32_t>(head.w.rows()));
  write_u64(out, seed);
  write_u64(out, step);
  write_doubles(out, enc.w1.data(), enc.w1.size());
  write_doubles(out, enc.b1.data(), enc.b1.size());
  write_doubles(out, enc.w2.data(), enc.w2.size());
  write_doubles(out, enc.b2.data(), enc.b2.size());
  write_doubles(out, head.w.data(), head.w.size());
  write_doubles(out, head.b.data(), head.b.size());
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad checkpoint magic: " + path);
  if (read_u32(in) != kVersion)
    throw std::runtime_error("unsupported checkpoint version: " + path);
  const int D = static_cast<int>(read_u32(in));
  const int H = static_cast<int>(read_u32(in));
  const int d = static_cast<int>(read_u32(in));
  const int C = static_cast<int>(read_u32(in));
  Checkpoint ck;
  ck.seed = read_u64(in);
  ck.step = read_u64(in);
  ck.enc.w1.resize(H, D);
  ck.enc.b1.resize(H);
  ck.enc.w2.resize(d, H);
  ck.enc.b2.resize(d);
  ck.head.w.resize(C, d);
  ck.head.b.resize(C);
  read_doubles(in, ck.enc.w1.data(), ck.enc.w1.size());
  read_doubles(in, ck.enc.b1.data(), ck.enc.b1.size());
  read_doubles(in, ck.enc.w2.data(), ck.enc.w2.size());
  read_doubles(in, ck.enc.b2.data(), ck.enc.b2.size());
  read_doubles(in, ck.head.w.data(), ck.head.w.size());
  read_doubles(in, ck.head.b.data(), ck.head.b.size());
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

}  // namespace knnft

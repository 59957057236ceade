#include "knnft/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "knnft/losses.hpp"
#include "knnft/rng.hpp"
#include "json.hpp"

namespace knnft {

void TrainConfig::validate() const {
  if (lambda < 0.0 || lambda > 1.0)
    throw std::invalid_argument("train.lambda must be in [0,1]");
  if (tau <= 0.0) throw std::invalid_argument("train.tau must be > 0");
  if (momentum < 0.0 || momentum > 1.0)
    throw std::invalid_argument("train.momentum must be in [0,1]");
  if (m_most < 0) throw std::invalid_argument("train.m_most must be >= 0");
  if (m_least < 0) throw std::invalid_argument("train.m_least must be >= 0");
  if (lambda > 0.0 && m_most + m_least < 1)
    throw std::invalid_argument("train.m_most + train.m_least must be >= 1 when lambda > 0");
  if (queue_capacity == 0)
    throw std::invalid_argument("train.queue_capacity must be positive");
  if (batch_size <= 0) throw std::invalid_argument("train.batch_size must be positive");
  if (learning_rate <= 0.0)
    throw std::invalid_argument("train.learning_rate must be positive");
  if (epochs <= 0) throw std::invalid_argument("train.epochs must be positive");
  if (knn_k <= 0) throw std::invalid_argument("train.knn_k must be positive");
  if (phi < 0.0 || phi > 1.0)
    throw std::invalid_argument("train.phi must be in [0,1]");
  if (hidden_dim <= 0 || embed_dim <= 0)
    throw std::invalid_argument("train.hidden_dim and train.embed_dim must be positive");
  if (few_shot_n < 0)
    throw std::invalid_argument("train.few_shot_n must be >= 0");
}

Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads, double lr,
                          double beta1, double beta2, double eps) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grads.allFinite())
    throw std::runtime_error("adam_step: non-finite gradient, aborting");
  if (state.m.size() == 0) {
    state.m = Eigen::VectorXd::Zero(params.size());
    state.v = Eigen::VectorXd::Zero(params.size());
  }
  ++state.step;
  state.m = beta1 * state.m + (1.0 - beta1) * grads;
  state.v = beta2 * state.v + (1.0 - beta2) * grads.array().square().matrix();
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
  const Eigen::ArrayXd m_hat = state.m.array() / bc1;
  const Eigen::ArrayXd v_hat = state.v.array() / bc2;
  return params.array() - lr * m_hat / (v_hat.sqrt() + eps);
}

Eigen::VectorXd pack_params(const EncoderParams& enc, const HeadParams& head) {
  Eigen::VectorXd flat(enc.w1.size() + enc.b1.size() + enc.w2.size() +
                       enc.b2.size() + head.w.size() + head.b.size());
  Eigen::Index off = 0;
  auto put = [&](const double* p, Eigen::Index n) {
    flat.segment(off, n) = Eigen::Map<const Eigen::VectorXd>(p, n);
    off += n;
  };
  put(enc.w1.data(), enc.w1.size());
  put(enc.b1.data(), enc.b1.size());
  put(enc.w2.data(), enc.w2.size());
  put(enc.b2.data(), enc.b2.size());
  put(head.w.data(), head.w.size());
  put(head.b.data(), head.b.size());
  return flat;
}

void unpack_params(const Eigen::VectorXd& flat, EncoderParams& enc,
                   HeadParams& head) {
  Eigen::Index off = 0;
  auto take = [&](double* p, Eigen::Index n) {
    Eigen::Map<Eigen::VectorXd>(p, n) = flat.segment(off, n);
    off += n;
  };
  take(enc.w1.data(), enc.w1.size());
  take(enc.b1.data(), enc.b1.size());
  take(enc.w2.data(), enc.w2.size());
  take(enc.b2.data(), enc.b2.size());
  take(head.w.data(), head.w.size());
  take(head.b.data(), head.b.size());
  if (off != flat.size())
    throw std::invalid_argument("unpack_params: size mismatch");
}

TrainState init_train_state(const TrainConfig& cfg, int input_dim,
                            int num_classes, std::uint64_t seed) {
  TrainState st{EncoderParams{}, EncoderParams{}, HeadParams{},
                ContrastQueue(cfg.queue_capacity), AdamState{}, 0, 0};
  st.theta_q = init_encoder(seed, {input_dim, cfg.hidden_dim, cfg.embed_dim});
  st.theta_k = st.theta_q;  // key encoder starts as an exact copy
  st.head = init_head(seed, cfg.embed_dim, num_classes);
  return st;
}

double train_step(TrainState& state,
                  const std::vector<std::pair<FeatureVector, int>>& batch,
                  const TrainConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
  const auto B = static_cast<double>(batch.size());
  const double ce_w = (1.0 - cfg.lambda) / B;
  const double sc_w = cfg.lambda / B;

  EncoderGrads acc{
      Eigen::MatrixXd::Zero(state.theta_q.w1.rows(), state.theta_q.w1.cols()),
      Eigen::VectorXd::Zero(state.theta_q.b1.size()),
      Eigen::MatrixXd::Zero(state.theta_q.w2.rows(), state.theta_q.w2.cols()),
      Eigen::VectorXd::Zero(state.theta_q.b2.size()),
      Eigen::VectorXd()};
  Eigen::MatrixXd head_gw =
      Eigen::MatrixXd::Zero(state.head.w.rows(), state.head.w.cols());
  Eigen::VectorXd head_gb = Eigen::VectorXd::Zero(state.head.b.size());

  double ce_total = 0.0;
  double sc_total = 0.0;
  for (const auto& [x, label] : batch) {
    const Representation rep = encode(state.theta_q, x);
    const Eigen::VectorXd logits = linear_head(state.head, rep.h);
    const LossValue ce = cross_entropy(logits, label);
    ce_total += ce.value;

    const Eigen::VectorXd glogits = ce_w * ce.grad;
    head_gw += glogits * rep.h.transpose();
    head_gb += glogits;
    Eigen::VectorXd grad_h = state.head.w.transpose() * glogits;

    Eigen::VectorXd grad_z = Eigen::VectorXd::Zero(rep.z.size());
    if (cfg.lambda > 0.0) {
      auto [positives, negatives] = state.queue.partition_by_label(label);
      if (positives.empty() || negatives.empty()) {
        ++state.warmup_skips;  // contrastive term undefined, treated as 0
      } else {
        const auto selected =
            select_positives(rep.z, positives, cfg.m_most, cfg.m_least);
        const LossValue sc = supervised_contrastive_selected(
            rep.z, selected, negatives, cfg.tau);
        sc_total += sc.value;
        grad_z = sc_w * sc.grad;
      }
    }

    const EncoderGrads g =
        encoder_backward(state.theta_q, x, grad_h, grad_z);
    acc.w1 += g.w1;
    acc.b1 += g.b1;
    acc.w2 += g.w2;
    acc.b2 += g.b2;
  }

  EncoderParams enc_grads{acc.w1, acc.b1, acc.w2, acc.b2};
  HeadParams head_grads{head_gw, head_gb};
  const Eigen::VectorXd flat = pack_params(state.theta_q, state.head);
  const Eigen::VectorXd updated = adam_step(
      state.opt, flat, pack_params(enc_grads, head_grads), cfg.learning_rate);
  unpack_params(updated, state.theta_q, state.head);

  state.theta_k = momentum_update(state.theta_k, state.theta_q, cfg.momentum);

  // keys come from the momentum encoder, after this batch's update
  std::vector<std::pair<Eigen::VectorXd, int>> keys;
  keys.reserve(batch.size());
  for (const auto& [x, label] : batch)
    keys.emplace_back(encode(state.theta_k, x).z, label);
  state.queue.push(keys);

  ++state.step;
  return (1.0 - cfg.lambda) * (ce_total / B) + cfg.lambda * (sc_total / B);
}

double evaluate(const EncoderParams& enc, const HeadParams& head,
                const AnchorIndex& index, const Dataset& dataset,
                const FeaturizerConfig& feat, int k, double phi,
                bool similarity_weighted) {
  if (index.anchors.empty()) throw std::invalid_argument("evaluate: empty index");
  std::size_t correct = 0;
  for (const auto& ex : dataset.examples) {
    const Representation rep = encode(enc, featurize(ex.text, feat));
    const Eigen::VectorXd logits = linear_head(head, rep.h);
    const Eigen::VectorXd votes = knn_vote(rep.z, index, k, similarity_weighted);
    const Eigen::VectorXd s = combined_predict(logits, votes, phi);
    if (argmax(s) == ex.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

SeedResult run_seed(const TrainConfig& cfg, const Dataset& train,
                    const Dataset& test, const FeaturizerConfig& feat,
                    std::uint64_t seed) {
  cfg.validate();
  Dataset train_used =
      cfg.few_shot_n > 0 ? few_shot_sample(train, cfg.few_shot_n, seed) : train;

  SeedResult result{init_train_state(cfg, feat.dimension, train.num_classes, seed),
                    std::move(train_used),
                    {},
                    0.0};
  TrainState& st = result.state;

  std::vector<std::size_t> order(result.train_used.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::pair<FeatureVector, int>> batch;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto rng = substream(seed, "shuffle_epoch_" + std::to_string(epoch));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t num_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(cfg.batch_size)) {
      batch.clear();
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      for (std::size_t i = start; i < end; ++i) {
        const auto& ex = result.train_used.examples[order[i]];
        batch.emplace_back(featurize(ex.text, feat), ex.label);
      }
      epoch_loss += train_step(st, batch, cfg);
      ++num_batches;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(num_batches));
  }

  const AnchorIndex index =
      build_anchor_index(st.theta_q, result.train_used, feat);
  result.accuracy = evaluate(st.theta_q, st.head, index, test, feat, cfg.knn_k,
                             cfg.phi, cfg.similarity_weighted_vote);
  return result;
}

MetricsReport summarize(const std::vector<std::uint64_t>& seeds,
                        const std::vector<double>& accuracies) {
  MetricsReport report{seeds, accuracies, 0.0, 0.0};
  const auto n = static_cast<double>(accuracies.size());
  report.mean =
      std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
  for (double a : accuracies)
    report.variance += (a - report.mean) * (a - report.mean);
  report.variance /= n;
  return report;
}

MetricsReport run_experiment(const TrainConfig& cfg, const Dataset& train,
                             const Dataset& test, const FeaturizerConfig& feat,
                             const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw std::invalid_argument("run_experiment: no seeds");
  std::vector<double> accuracies;
  accuracies.reserve(seeds.size());
  for (std::uint64_t seed : seeds)
    accuracies.push_back(run_seed(cfg, train, test, feat, seed).accuracy);
  return summarize(seeds, accuracies);
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_metrics_json(const MetricsReport& report,
                        const std::string& config_echo,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics file: " + path);
  for (std::size_t i = 0; i < report.seeds.size(); ++i) {
    nlohmann::json rec{{"record", "seed"},
                       {"format_version", 1},
                       {"seed", report.seeds[i]},
                       {"accuracy", report.accuracies[i]}};
    out << rec.dump() << '\n';
  }
  nlohmann::json summary{{"record", "summary"},
                         {"format_version", 1},
                         {"mean", report.mean},
                         {"variance", report.variance},
                         {"config_echo", config_echo}};
  out << summary.dump() << '\n';
}

void write_metrics_table(const MetricsReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write metrics table: " + path);
  out << "seed\taccuracy\n";
  for (std::size_t i = 0; i < report.seeds.size(); ++i)
    out << report.seeds[i] << '\t' << fmt_double(report.accuracies[i]) << '\n';
  out << "mean\t" << fmt_double(report.mean) << '\n';
  out << "variance\t" << fmt_double(report.variance) << '\n';
}

}  // namespace knnft

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "knnft/data.hpp"
#include "knnft/encoder.hpp"
#include "knnft/knn.hpp"
#include "knnft/moco.hpp"

namespace knnft {

struct TrainConfig {
  double lambda = 0.5;        // CE vs contrastive mix
  double tau = 0.07;          // contrastive temperature
  double momentum = 0.999;    // key-encoder momentum m
  int m_most = 3;             // most-similar positives
  int m_least = 3;            // least-similar (hard) positives
  std::size_t queue_capacity = 4096;
  int batch_size = 8;
  double learning_rate = 1e-3;
  int epochs = 5;
  int knn_k = 10;
  double phi = 0.5;           // inference blend weight
  int hidden_dim = 32;
  int embed_dim = 16;
  int few_shot_n = 0;         // 0 = full training set
  bool similarity_weighted_vote = false;

  void validate() const;  // throws naming the offending field
};

struct AdamState {
  Eigen::VectorXd m;  // first moment
  Eigen::VectorXd v;  // second moment
  std::int64_t step = 0;
};

// Standard bias-corrected adaptive-moment update on a flat parameter
// vector. Throws on non-finite gradients.
Eigen::VectorXd adam_step(AdamState& state, const Eigen::VectorXd& params,
                          const Eigen::VectorXd& grads, double lr,
                          double beta1 = 0.9, double beta2 = 0.999,
                          double eps = 1e-8);

// Flat views of all trainable parameters (theta_q + head). theta_k is
// never part of these; the optimizer cannot touch it.
Eigen::VectorXd pack_params(const EncoderParams& enc, const HeadParams& head);
void unpack_params(const Eigen::VectorXd& flat, EncoderParams& enc,
                   HeadParams& head);

struct TrainState {
  EncoderParams theta_q;
  EncoderParams theta_k;
  HeadParams head;
  ContrastQueue queue;
  AdamState opt;
  std::int64_t step = 0;
  std::int64_t warmup_skips = 0;  // contrastive terms skipped on empty sides
};

TrainState init_train_state(const TrainConfig& cfg, int input_dim,
                            int num_classes, std::uint64_t seed);

// One optimization step: forward queries through theta_q, mix CE and the
// selected contrastive loss by lambda, Adam-update theta_q and the head,
// momentum-update theta_k, then encode the batch with theta_k and push it
// into the queue (after the gradient step, so a query never serves as its
// own key). Returns the batch loss.
double train_step(TrainState& state,
                  const std::vector<std::pair<FeatureVector, int>>& batch,
                  const TrainConfig& cfg);

// Fraction of examples whose argmax of the combined prediction (ties to
// the lowest class) equals the gold label.
double evaluate(const EncoderParams& enc, const HeadParams& head,
                const AnchorIndex& index, const Dataset& dataset,
                const FeaturizerConfig& feat, int k, double phi,
                bool similarity_weighted = false);

struct SeedResult {
  TrainState state;
  Dataset train_used;               // post few-shot sampling
  std::vector<double> epoch_losses;  // mean batch loss per epoch
  double accuracy = 0.0;
};

// Deterministic per (cfg, data, seed): few-shot sample if configured,
// train, build the anchor index with the final query encoder over the
// training set, evaluate on the test set.
SeedResult run_seed(const TrainConfig& cfg, const Dataset& train,
                    const Dataset& test, const FeaturizerConfig& feat,
                    std::uint64_t seed);

struct MetricsReport {
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracies;
  double mean = 0.0;
  double variance = 0.0;  // population variance across seeds
};

MetricsReport summarize(const std::vector<std::uint64_t>& seeds,
                        const std::vector<double>& accuracies);

MetricsReport run_experiment(const TrainConfig& cfg, const Dataset& train,
                             const Dataset& test, const FeaturizerConfig& feat,
                             const std::vector<std::uint64_t>& seeds);

// JSON-lines metrics file: one record per seed, then a summary record.
// config_echo is embedded verbatim for reproducibility diffs.
void write_metrics_json(const MetricsReport& report,
                        const std::string& config_echo,
                        const std::string& path);

void write_metrics_table(const MetricsReport& report, const std::string& path);

}  // namespace knnft

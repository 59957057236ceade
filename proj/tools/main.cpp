#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "json.hpp"
#include "knnft/attack.hpp"
#include "knnft/config.hpp"
#include "knnft/model.hpp"
#include "knnft/trainer.hpp"

namespace fs = std::filesystem;
using namespace knnft;

namespace {

struct LoadedData {
  Dataset train;
  Dataset test;
};

LoadedData load_data(const ExperimentConfig& cfg) {
  return {load_dataset(cfg.train_path, cfg.num_classes),
          load_dataset(cfg.test_path, cfg.num_classes)};
}

void check_checkpoint_dims(const Checkpoint& ck, const ExperimentConfig& cfg) {
  const auto dims = ck.enc.dims();
  if (dims.input != cfg.featurizer.dimension ||
      dims.hidden != cfg.train.hidden_dim || dims.embed != cfg.train.embed_dim ||
      static_cast<int>(ck.head.w.rows()) != cfg.num_classes)
    throw std::runtime_error(
        "checkpoint dimension header does not match the config");
}

// Rebuilds the classifier a checkpoint was trained as: anchors come from the
// (possibly few-shot-sampled, via the checkpointed seed) training set,
// encoded with the final query encoder.
TextClassifier load_classifier(const ExperimentConfig& cfg,
                               const std::string& ckpt_path,
                               const Dataset& train) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  check_checkpoint_dims(ck, cfg);
  const Dataset anchors_from = cfg.train.few_shot_n > 0
                                   ? few_shot_sample(train, cfg.train.few_shot_n, ck.seed)
                                   : train;
  TextClassifier model;
  model.enc = ck.enc;
  model.head = ck.head;
  model.index = build_anchor_index(ck.enc, anchors_from, cfg.featurizer);
  model.feat = cfg.featurizer;
  model.knn_k = cfg.train.knn_k;
  model.similarity_weighted = cfg.train.similarity_weighted_vote;
  return model;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  out << content;
}

int cmd_train(const std::string& config_path, const std::string& out_override) {
  ExperimentConfig cfg = load_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  cfg.validate();
  const LoadedData data = load_data(cfg);
  fs::create_directories(cfg.out_dir);

  std::vector<double> accuracies;
  for (std::uint64_t seed : cfg.seeds) {
    const SeedResult result =
        run_seed(cfg.train, data.train, data.test, cfg.featurizer, seed);
    accuracies.push_back(result.accuracy);
    save_checkpoint(cfg.out_dir + "/seed_" + std::to_string(seed) + ".ckpt",
                    result.state.theta_q, result.state.head, seed,
                    static_cast<std::uint64_t>(result.state.step));
    std::cout << "seed " << seed << ": accuracy " << result.accuracy
              << " (warm-up skips " << result.state.warmup_skips << ")\n";
  }
  const MetricsReport report = summarize(cfg.seeds, accuracies);
  write_metrics_json(report, cfg.raw_text, cfg.out_dir + "/metrics.jsonl");
  write_metrics_table(report, cfg.out_dir + "/metrics.txt");
  write_text(cfg.out_dir + "/config_echo.txt", cfg.raw_text);
  std::cout << "mean " << report.mean << " variance " << report.variance << "\n";
  return 0;
}

int cmd_eval(const std::string& config_path, const std::string& ckpt_path,
             const std::string& out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  cfg.validate();
  const LoadedData data = load_data(cfg);
  const TextClassifier model = load_classifier(cfg, ckpt_path, data.train);
  const double acc = evaluate(model.enc, model.head, model.index, data.test,
                              cfg.featurizer, cfg.train.knn_k, cfg.train.phi,
                              cfg.train.similarity_weighted_vote);
  nlohmann::json rec{{"record", "eval"},
                     {"format_version", 1},
                     {"checkpoint", ckpt_path},
                     {"k", cfg.train.knn_k},
                     {"phi", cfg.train.phi},
                     {"accuracy", acc},
                     {"config_echo", cfg.raw_text}};
  if (!out_path.empty()) write_text(out_path, rec.dump() + "\n");
  std::cout << rec.dump() << "\n";
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::vector<std::string>& values,
              const std::string& out_path) {
  if (values.empty()) throw std::invalid_argument("sweep: empty values list");
  ExperimentConfig cfg = load_config(config_path);
  cfg.validate();
  const LoadedData data = load_data(cfg);

  std::ostringstream table;
  table << "# config echo:\n";
  std::istringstream echo(cfg.raw_text);
  for (std::string line; std::getline(echo, line);) table << "# " << line << "\n";
  table << axis << "\tmean\tvariance\n";

  if (axis == "K" || axis == "phi") {
    // inference-time axes: train once per seed, evaluate per value
    std::vector<SeedResult> results;
    std::vector<AnchorIndex> indices;
    for (std::uint64_t seed : cfg.seeds) {
      results.push_back(
          run_seed(cfg.train, data.train, data.test, cfg.featurizer, seed));
      indices.push_back(build_anchor_index(results.back().state.theta_q,
                                           results.back().train_used,
                                           cfg.featurizer));
    }
    for (const auto& value : values) {
      int k = cfg.train.knn_k;
      double phi = cfg.train.phi;
      if (axis == "K") k = std::stoi(value);
      else phi = std::stod(value);
      std::vector<double> accs;
      for (std::size_t i = 0; i < results.size(); ++i)
        accs.push_back(evaluate(results[i].state.theta_q, results[i].state.head,
                                indices[i], data.test, cfg.featurizer, k, phi,
                                cfg.train.similarity_weighted_vote));
      const MetricsReport rep = summarize(cfg.seeds, accs);
      table << value << '\t' << fmt(rep.mean) << '\t' << fmt(rep.variance) << '\n';
    }
  } else if (axis == "lambda" || axis == "m_most" || axis == "m_least") {
    for (const auto& value : values) {
      TrainConfig tc = cfg.train;
      if (axis == "lambda") tc.lambda = std::stod(value);
      else if (axis == "m_most") tc.m_most = std::stoi(value);
      else tc.m_least = std::stoi(value);
      const MetricsReport rep =
          run_experiment(tc, data.train, data.test, cfg.featurizer, cfg.seeds);
      table << value << '\t' << fmt(rep.mean) << '\t' << fmt(rep.variance) << '\n';
    }
  } else {
    throw std::invalid_argument(
        "sweep: axis must be one of K, phi, lambda, m_most, m_least");
  }

  if (!out_path.empty()) write_text(out_path, table.str());
  std::cout << table.str();
  return 0;
}

int cmd_attack(const std::string& config_path, const std::string& ckpt_path,
               const std::string& out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  cfg.validate();
  if (cfg.lexicon_path.empty())
    throw std::invalid_argument("attack: config must set attack.lexicon");
  const LoadedData data = load_data(cfg);
  const TextClassifier model = load_classifier(cfg, ckpt_path, data.train);
  const SynonymLexicon lexicon = SynonymLexicon::load(cfg.lexicon_path);

  Dataset subset;
  subset.num_classes = data.test.num_classes;
  const std::size_t n = std::min<std::size_t>(
      static_cast<std::size_t>(cfg.attack_subset_size), data.test.size());
  subset.examples.assign(data.test.examples.begin(),
                         data.test.examples.begin() + static_cast<std::ptrdiff_t>(n));

  std::ostringstream report;
  std::ostringstream table;
  table << "phi\tclean\tafter_attack\n";
  for (double phi : cfg.attack_phis) {
    std::size_t correct = 0;
    for (const auto& ex : subset.examples)
      if (argmax(model.predict(ex.text, phi)) == ex.label) ++correct;
    const double clean = static_cast<double>(correct) / static_cast<double>(n);
    const AttackConfig acfg{cfg.attack_max_sub_fraction, phi};
    const double after = after_attack_accuracy(model, subset, lexicon, acfg);
    nlohmann::json rec{{"record", "attack"},
                       {"format_version", 1},
                       {"phi", phi},
                       {"clean_accuracy", clean},
                       {"after_attack_accuracy", after},
                       {"subset_size", n}};
    report << rec.dump() << '\n';
    table << fmt(phi) << '\t' << fmt(clean) << '\t' << fmt(after) << '\n';
    if (!out_path.empty())
      write_attack_report(model, subset, lexicon, acfg,
                          out_path + ".phi" + fmt(phi) + ".jsonl");
  }
  if (!out_path.empty()) write_text(out_path, report.str());
  std::cout << table.str();
  return 0;
}

int cmd_export(const std::string& config_path, const std::string& ckpt_path,
               const std::string& split, const std::string& out_path) {
  const ExperimentConfig cfg = load_config(config_path);
  cfg.validate();
  if (out_path.empty())
    throw std::invalid_argument("export-embeddings: --out is required");
  const Checkpoint ck = load_checkpoint(ckpt_path);
  check_checkpoint_dims(ck, cfg);
  const std::string path = split == "train"   ? cfg.train_path
                           : split == "test"  ? cfg.test_path
                           : split == "dev"   ? cfg.dev_path
                                              : "";
  if (path.empty())
    throw std::invalid_argument("export-embeddings: bad split '" + split + "'");
  const Dataset dataset = load_dataset(path, cfg.num_classes);
  const AnchorIndex index = build_anchor_index(ck.enc, dataset, cfg.featurizer);
  export_index_tsv(index, out_path);
  std::cout << "wrote " << index.anchors.size() << " rows to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"KNN-augmented classifier: train, evaluate, sweep, attack, export"};
  app.require_subcommand(1);

  std::string config_path, ckpt_path, out_path, axis, split = "train";
  std::vector<std::string> values;

  auto* train = app.add_subcommand("train", "train across seeds, write checkpoints + metrics");
  train->add_option("--config", config_path)->required();
  train->add_option("--out", out_path);

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test set");
  eval->add_option("--config", config_path)->required();
  eval->add_option("--checkpoint", ckpt_path)->required();
  eval->add_option("--out", out_path);

  auto* sweep = app.add_subcommand("sweep", "ablation sweep over one axis");
  sweep->add_option("--config", config_path)->required();
  sweep->add_option("--axis", axis)->required();
  sweep->add_option("--values", values)->required()->delimiter(',');
  sweep->add_option("--out", out_path);

  auto* attack = app.add_subcommand("attack", "greedy substitution attack report");
  attack->add_option("--config", config_path)->required();
  attack->add_option("--checkpoint", ckpt_path)->required();
  attack->add_option("--out", out_path);

  auto* exp = app.add_subcommand("export-embeddings", "TSV of (id, label, z)");
  exp->add_option("--config", config_path)->required();
  exp->add_option("--checkpoint", ckpt_path)->required();
  exp->add_option("--split", split)->check(CLI::IsMember({"train", "test", "dev"}));
  exp->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return cmd_train(config_path, out_path);
    if (*eval) return cmd_eval(config_path, ckpt_path, out_path);
    if (*sweep) return cmd_sweep(config_path, axis, values, out_path);
    if (*attack) return cmd_attack(config_path, ckpt_path, out_path);
    if (*exp) return cmd_export(config_path, ckpt_path, split, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

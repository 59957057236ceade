#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "knnft/data.hpp"
#include "knnft/trainer.hpp"

namespace knnft {

// Flat `key = value` experiment configuration. Unknown keys are rejected;
// every value is type-checked with a field-level message.
struct ExperimentConfig {
  std::string train_path;
  std::string dev_path;  // optional
  std::string test_path;
  int num_classes = 0;

  FeaturizerConfig featurizer;
  TrainConfig train;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};

  std::string lexicon_path;
  double attack_max_sub_fraction = 0.3;
  int attack_subset_size = 100;
  std::vector<double> attack_phis = {0.0, 0.5, 1.0};

  std::string out_dir = ".";

  std::string raw_text;  // verbatim file contents, echoed into outputs

  void validate() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace knnft

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace knnft {

struct Example {
  std::int64_t id = 0;  // position in the source file
  std::string text;
  int label = 0;
};

struct Dataset {
  std::vector<Example> examples;
  int num_classes = 0;

  std::size_t size() const { return examples.size(); }
};

struct FeaturizerConfig {
  int dimension = 256;
  std::set<int> ngram_orders = {1, 2};
  std::uint64_t hash_seed = 0;
};

using FeatureVector = Eigen::VectorXd;

// Lowercases and splits on unicode whitespace (ASCII whitespace bytes; UTF-8
// multibyte sequences never contain them, so byte-level splitting is safe).
std::vector<std::string> tokenize(const std::string& text);

// Parses `<label>\t<text>` lines in file order. Throws on malformed lines
// (with the line number), labels >= num_classes, and empty files.
Dataset load_dataset(const std::string& path, int num_classes);

// Writes the TSV form back out; load_dataset(save_dataset(d)) == d.
void save_dataset(const Dataset& dataset, const std::string& path);

// Signed feature hashing over word n-grams, scaled by 1/max(1, token_count).
// For each n-gram g: h = fnv1a64(g, basis ^ hash_seed * 0x9e3779b97f4a7c15),
// sign = (h & 1) ? +1 : -1, bucket = (h >> 1) % dimension.
// Pure function: identical text + config gives identical vectors everywhere.
FeatureVector featurize(const std::string& text, const FeaturizerConfig& config);

// Class-balanced draw of n examples: floor(n/C) per class, remainder assigned
// to the lowest class indices, chosen by seeded shuffling within each class.
// Throws if a class cannot fill its quota.
Dataset few_shot_sample(const Dataset& dataset, int n, std::uint64_t seed);

}  // namespace knnft

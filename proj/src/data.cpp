#include "knnft/data.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "knnft/rng.hpp"

namespace knnft {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Dataset load_dataset(const std::string& path, int num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);

  Dataset dataset;
  dataset.num_classes = num_classes;
  std::string line;
  std::int64_t line_no = 0;
  std::int64_t next_id = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed line, expected <label>\\t<text>");
    int label = 0;
    try {
      std::size_t consumed = 0;
      label = std::stoi(line.substr(0, tab), &consumed);
      if (consumed != tab) throw std::invalid_argument("trailing chars");
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": malformed label field");
    }
    if (label < 0 || label >= num_classes)
      throw std::out_of_range(path + ":" + std::to_string(line_no) +
                              ": label " + std::to_string(label) +
                              " out of range [0, " +
                              std::to_string(num_classes) + ")");
    dataset.examples.push_back({next_id++, line.substr(tab + 1), label});
  }
  if (dataset.examples.empty())
    throw std::runtime_error("empty dataset: " + path);
  return dataset;
}

void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  for (const auto& ex : dataset.examples)
    out << ex.label << '\t' << ex.text << '\n';
}

FeatureVector featurize(const std::string& text, const FeaturizerConfig& config) {
  if (config.dimension < 2)
    throw std::invalid_argument("featurizer dimension must be >= 2");
  FeatureVector v = FeatureVector::Zero(config.dimension);
  const auto tokens = tokenize(text);
  if (tokens.empty()) return v;

  const std::uint64_t basis =
      14695981039346656037ull ^ (config.hash_seed * 0x9e3779b97f4a7c15ull);
  for (int order : config.ngram_orders) {
    if (order < 1 || tokens.size() < static_cast<std::size_t>(order)) continue;
    for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
      std::string gram = tokens[i];
      for (int j = 1; j < order; ++j) {
        gram.push_back(' ');
        gram += tokens[i + j];
      }
      const std::uint64_t h = fnv1a64(gram, basis);
      const double sign = (h & 1ull) ? 1.0 : -1.0;
      const auto bucket =
          static_cast<Eigen::Index>((h >> 1) % static_cast<std::uint64_t>(config.dimension));
      v[bucket] += sign;
    }
  }
  v /= static_cast<double>(std::max<std::size_t>(1, tokens.size()));
  return v;
}

Dataset few_shot_sample(const Dataset& dataset, int n, std::uint64_t seed) {
  if (n <= 0 || static_cast<std::size_t>(n) > dataset.size())
    throw std::invalid_argument("few_shot_sample: n out of range");
  const int C = dataset.num_classes;

  std::vector<std::vector<std::size_t>> by_class(C);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[dataset.examples[i].label].push_back(i);

  // floor(n/C) per class; the remainder goes to the lowest class indices.
  std::vector<int> quota(C, n / C);
  for (int c = 0; c < n % C; ++c) ++quota[c];

  Dataset out;
  out.num_classes = C;
  for (int c = 0; c < C; ++c) {
    if (static_cast<int>(by_class[c].size()) < quota[c])
      throw std::runtime_error("few_shot_sample: class " + std::to_string(c) +
                               " has only " + std::to_string(by_class[c].size()) +
                               " examples, needs " + std::to_string(quota[c]));
    auto rng = substream(seed, "few_shot_class_" + std::to_string(c));
    std::shuffle(by_class[c].begin(), by_class[c].end(), rng);
    for (int j = 0; j < quota[c]; ++j)
      out.examples.push_back(dataset.examples[by_class[c][j]]);
  }
  return out;
}

}  // namespace knnft

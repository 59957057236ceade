#include "knnft/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace knnft {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw std::invalid_argument("config: invalid value for '" + key + "': " + value);
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) bad_value(key, value);
    return v;
  } catch (const std::invalid_argument&) {
    bad_value(key, value);
  } catch (const std::out_of_range&) {
    bad_value(key, value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value);
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::stringstream ss(value);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw_text = text;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));

    if (key == "data.train") cfg.train_path = value;
    else if (key == "data.dev") cfg.dev_path = value;
    else if (key == "data.test") cfg.test_path = value;
    else if (key == "data.num_classes") cfg.num_classes = parse_int(key, value);
    else if (key == "featurizer.dimension") cfg.featurizer.dimension = parse_int(key, value);
    else if (key == "featurizer.hash_seed") cfg.featurizer.hash_seed = parse_u64(key, value);
    else if (key == "featurizer.ngram_orders") {
      cfg.featurizer.ngram_orders.clear();
      for (const auto& p : split_commas(value))
        cfg.featurizer.ngram_orders.insert(parse_int(key, p));
      if (cfg.featurizer.ngram_orders.empty()) bad_value(key, value);
    }
    else if (key == "train.lambda") cfg.train.lambda = parse_double(key, value);
    else if (key == "train.tau") cfg.train.tau = parse_double(key, value);
    else if (key == "train.momentum") cfg.train.momentum = parse_double(key, value);
    else if (key == "train.m_most") cfg.train.m_most = parse_int(key, value);
    else if (key == "train.m_least") cfg.train.m_least = parse_int(key, value);
    else if (key == "train.queue_capacity") {
      const int v = parse_int(key, value);
      if (v <= 0) bad_value(key, value);
      cfg.train.queue_capacity = static_cast<std::size_t>(v);
    }
    else if (key == "train.batch_size") cfg.train.batch_size = parse_int(key, value);
    else if (key == "train.learning_rate") cfg.train.learning_rate = parse_double(key, value);
    else if (key == "train.epochs") cfg.train.epochs = parse_int(key, value);
    else if (key == "train.knn_k") cfg.train.knn_k = parse_int(key, value);
    else if (key == "train.phi") cfg.train.phi = parse_double(key, value);
    else if (key == "train.hidden_dim") cfg.train.hidden_dim = parse_int(key, value);
    else if (key == "train.embed_dim") cfg.train.embed_dim = parse_int(key, value);
    else if (key == "train.few_shot_n") cfg.train.few_shot_n = parse_int(key, value);
    else if (key == "train.similarity_weighted_vote")
      cfg.train.similarity_weighted_vote = parse_bool(key, value);
    else if (key == "seeds") {
      cfg.seeds.clear();
      for (const auto& p : split_commas(value)) cfg.seeds.push_back(parse_u64(key, p));
      if (cfg.seeds.empty()) bad_value(key, value);
    }
    else if (key == "attack.lexicon") cfg.lexicon_path = value;
    else if (key == "attack.max_sub_fraction")
      cfg.attack_max_sub_fraction = parse_double(key, value);
    else if (key == "attack.subset_size")
      cfg.attack_subset_size = parse_int(key, value);
    else if (key == "attack.phis") {
      cfg.attack_phis.clear();
      for (const auto& p : split_commas(value))
        cfg.attack_phis.push_back(parse_double(key, p));
      if (cfg.attack_phis.empty()) bad_value(key, value);
    }
    else if (key == "out.dir") cfg.out_dir = value;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void ExperimentConfig::validate() const {
  if (train_path.empty()) throw std::invalid_argument("config: data.train is required");
  if (test_path.empty()) throw std::invalid_argument("config: data.test is required");
  if (num_classes < 2) throw std::invalid_argument("config: data.num_classes must be >= 2");
  if (featurizer.dimension < 2)
    throw std::invalid_argument("config: featurizer.dimension must be >= 2");
  for (int o : featurizer.ngram_orders)
    if (o < 1) throw std::invalid_argument("config: featurizer.ngram_orders must be >= 1");
  train.validate();
  if (seeds.empty()) throw std::invalid_argument("config: seeds must be nonempty");
  if (attack_max_sub_fraction < 0.0 || attack_max_sub_fraction > 1.0)
    throw std::invalid_argument("config: attack.max_sub_fraction must be in [0,1]");
  if (attack_subset_size <= 0)
    throw std::invalid_argument("config: attack.subset_size must be positive");
  for (double phi : attack_phis)
    if (phi < 0.0 || phi > 1.0)
      throw std::invalid_argument("config: attack.phis entries must be in [0,1]");
}

}  // namespace knnft

#include "knnft/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace knnft {

SynonymLexicon SynonymLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon: " + path);
  SynonymLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("malformed lexicon line: " + line);
    std::vector<std::string> candidates;
    std::stringstream ss(line.substr(tab + 1));
    std::string cand;
    while (std::getline(ss, cand, ','))
      if (!cand.empty()) candidates.push_back(cand);
    lex.add(line.substr(0, tab), std::move(candidates));
  }
  return lex;
}

namespace {

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

}  // namespace

void SynonymLexicon::add(const std::string& word,
                         std::vector<std::string> candidates) {
  const std::string key = lower(word);
  std::vector<std::string> kept;
  for (auto& c : candidates) {
    std::string lc = lower(c);
    if (lc != key) kept.push_back(std::move(lc));  // never its own substitute
  }
  entries_[key] = std::move(kept);
}

const std::vector<std::string>* SynonymLexicon::lookup(
    const std::string& word) const {
  const auto it = entries_.find(lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::size_t> word_importance(const TextClassifier& model,
                                         const Example& example, double phi) {
  const auto tokens = tokenize(example.text);
  if (tokens.empty()) return {};
  if (tokens.size() == 1) return {0};

  const double s_orig = model.predict(example.text, phi)[example.label];
  std::vector<double> importance(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::vector<std::string> reduced = tokens;
    reduced.erase(reduced.begin() + static_cast<std::ptrdiff_t>(i));
    importance[i] = s_orig - model.predict(join(reduced), phi)[example.label];
  }

  std::vector<std::size_t> order(tokens.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (importance[a] != importance[b]) return importance[a] > importance[b];
    return a < b;
  });
  return order;
}

AttackOutcome greedy_substitution_attack(const TextClassifier& model,
                                         const Example& example,
                                         const SynonymLexicon& lexicon,
                                         const AttackConfig& cfg) {
  AttackOutcome outcome;
  outcome.adversarial_text = example.text;

  Eigen::VectorXd s = model.predict(example.text, cfg.phi);
  ++outcome.queries;
  if (argmax(s) != example.label) {
    outcome.success = true;  // already misclassified, nothing to do
    return outcome;
  }

  std::vector<std::string> tokens = tokenize(example.text);
  if (tokens.empty() || lexicon.empty()) return outcome;

  const int budget = static_cast<int>(
      std::ceil(cfg.max_sub_fraction * static_cast<double>(tokens.size())));
  const auto order = word_importance(model, example, cfg.phi);
  if (tokens.size() > 1)
    outcome.queries += static_cast<int>(tokens.size()) + 1;

  double s_gold = s[example.label];
  for (std::size_t pos : order) {
    if (outcome.substitutions >= budget) break;
    const auto* candidates = lexicon.lookup(tokens[pos]);
    if (!candidates || candidates->empty()) continue;

    // commit the candidate that lowers the gold score the most;
    // first-in-lexicon-order wins exact ties
    double best_gold = s_gold;
    Eigen::VectorXd best_s;
    const std::string* best_cand = nullptr;
    const std::string original = tokens[pos];
    for (const auto& cand : *candidates) {
      tokens[pos] = cand;
      const Eigen::VectorXd trial = model.predict(join(tokens), cfg.phi);
      ++outcome.queries;
      if (trial[example.label] < best_gold) {
        best_gold = trial[example.label];
        best_s = trial;
        best_cand = &cand;
      }
    }
    if (!best_cand) {
      tokens[pos] = original;
      continue;
    }
    tokens[pos] = *best_cand;
    s_gold = best_gold;
    ++outcome.substitutions;
    outcome.adversarial_text = join(tokens);
    if (argmax(best_s) != example.label) {
      outcome.success = true;
      return outcome;
    }
  }
  return outcome;
}

double after_attack_accuracy(const TextClassifier& model,
                             const Dataset& dataset,
                             const SynonymLexicon& lexicon,
                             const AttackConfig& cfg) {
  std::size_t survived = 0;
  for (const auto& ex : dataset.examples) {
    if (argmax(model.predict(ex.text, cfg.phi)) != ex.label) continue;
    const AttackOutcome outcome =
        greedy_substitution_attack(model, ex, lexicon, cfg);
    if (!outcome.success) ++survived;
  }
  return static_cast<double>(survived) / static_cast<double>(dataset.size());
}

void write_attack_report(const TextClassifier& model, const Dataset& dataset,
                         const SynonymLexicon& lexicon, const AttackConfig& cfg,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write attack report: " + path);
  for (const auto& ex : dataset.examples) {
    const AttackOutcome outcome =
        greedy_substitution_attack(model, ex, lexicon, cfg);
    nlohmann::json rec{{"example_id", ex.id},
                       {"success", outcome.success},
                       {"substitutions", outcome.substitutions},
                       {"queries", outcome.queries}};
    out << rec.dump() << '\n';
  }
}

}  // namespace knnft

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "knnft/data.hpp"
#include "knnft/model.hpp"

namespace knnft {

// word -> ordered candidate substitutes; lookup is case-normalized and a
// word is never its own substitute.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;

  // File format: `word\tcandidate1,candidate2,...` per line.
  static SynonymLexicon load(const std::string& path);

  void add(const std::string& word, std::vector<std::string> candidates);
  const std::vector<std::string>* lookup(const std::string& word) const;
  bool empty() const { return entries_.empty(); }

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

struct AttackConfig {
  double max_sub_fraction = 0.3;
  double phi = 0.5;
};

struct AttackOutcome {
  bool success = false;
  std::string adversarial_text;
  int substitutions = 0;
  int queries = 0;  // model evaluations spent
};

// Deletion-based importance: how much removing each word lowers the gold
// score. Positions sorted by importance descending, ties by ascending
// position. A single-word text yields that one position.
std::vector<std::size_t> word_importance(const TextClassifier& model,
                                         const Example& example, double phi);

// Greedy word substitution: visit positions by importance; at each, commit
// the lexicon candidate that lowers the gold score the most. Succeeds when
// the argmax flips; fails when positions run out or the substitution budget
// ceil(max_sub_fraction * word_count) is spent. Fully deterministic.
AttackOutcome greedy_substitution_attack(const TextClassifier& model,
                                         const Example& example,
                                         const SynonymLexicon& lexicon,
                                         const AttackConfig& cfg);

// Fraction of examples still correctly classified after the attack.
// Originally-misclassified examples count as 0, so the metric never
// exceeds clean accuracy.
double after_attack_accuracy(const TextClassifier& model,
                             const Dataset& dataset,
                             const SynonymLexicon& lexicon,
                             const AttackConfig& cfg);

// JSON-lines per-example report (id, success, substitutions, queries).
void write_attack_report(const TextClassifier& model, const Dataset& dataset,
                         const SynonymLexicon& lexicon, const AttackConfig& cfg,
                         const std::string& path);

}  // namespace knnft

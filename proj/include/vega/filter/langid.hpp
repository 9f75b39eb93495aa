#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "vega/core/text.hpp"

namespace vega::filter {

/// Character-trigram Naive Bayes language identifier. Probabilities use
/// add-one smoothing over the union trigram set plus one unseen bucket, so
/// every language's table is a proper distribution.
class LangIdModel {
 public:
  struct Table {
    std::unordered_map<std::string, double> log_prob;
    double unseen_log_prob = 0.0;
    double log_prior = 0.0;
  };

  explicit LangIdModel(std::map<std::string, Table> tables) : tables_(std::move(tables)) {}

  std::vector<std::string> languages() const;
  const Table& table(const std::string& lang) const;

  /// Log-likelihood plus log prior for each language.
  std::map<std::string, double> scores(const Sentence& sentence) const;
  std::string classify(const Sentence& sentence) const;

 private:
  std::map<std::string, Table> tables_;
};

/// Character trigrams of a sentence, padded with a boundary space.
std::vector<std::string> char_trigrams(const Sentence& sentence);

/// Throws InvalidArgument with fewer than 2 languages or fewer than 100
/// sentences for any language.
LangIdModel train_langid(const std::map<std::string, std::vector<Sentence>>& corpora);

}  // namespace vega::filter

#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "vega/core/text.hpp"

namespace vega::augment {

/// Word n-gram language model with add-k smoothing. The vocabulary holds the
/// training words plus "</s>" and "<unk>"; histories are padded with "<s>".
class NgramLM {
 public:
  explicit NgramLM(int order = 3, double k = 0.1, std::vector<std::string> vocabulary = {});

  void train(const std::vector<Sentence>& corpus);

  /// log P(word | last order-1 words of history); unknown words score as
  /// "<unk>".
  double log_prob(const std::vector<std::string>& history, const std::string& word) const;

  int order() const { return order_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocabulary() const { return vocab_; }

 private:
  std::string key(const std::vector<std::string>& history) const;
  void add_word(const std::string& w);

  int order_;
  double k_;
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, double> context_counts_;
  std::unordered_map<std::string, double> ngram_counts_;
};

NgramLM train_ngram_lm(const std::vector<Sentence>& corpus, int order = 3, double k = 0.1);

/// Mean negative log-likelihood per predicted token, "</s>" included.
/// Throws InvalidArgument on an empty sentence.
double lm_score(const NgramLM& lm, const Sentence& sentence);

}  // namespace vega::augment

#pragma once

#include <cstdint>
#include <vector>

#include "vega/corpus/sentence_pair.hpp"
#include "vega/model/transformer.hpp"
#include "vega/subword/vocab.hpp"

namespace vega::train {

using model::Example;

/// Encoder input is the target-language tag followed by the source pieces;
/// the decoder starts from BOS.
Example encode_pair(const corpus::SentencePair& pair, const subword::SubwordVocab& vocab);
std::vector<Example> encode_pairs(const std::vector<corpus::SentencePair>& pairs,
                                  const subword::SubwordVocab& vocab);

/// Padded length one example occupies in a batch: max(|src|, |tgt| + 1).
std::size_t example_tokens(const Example& example);

struct Batch {
  std::vector<std::size_t> indices;
  std::size_t padded_tokens = 0;  // indices.size() * longest member
};

struct BatchPlan {
  std::vector<Batch> batches;
  std::vector<std::size_t> skipped;  // examples longer than the budget
};

/// One epoch: every example lands in exactly one batch unless it alone
/// exceeds the budget. Examples are grouped by length after a seeded shuffle
/// and the batch order is shuffled again.
BatchPlan make_batches(const std::vector<Example>& examples, std::size_t tokens_per_batch,
                       std::uint64_t seed);

/// Endless batch source that replans with a fresh seed each epoch.
class BatchStream {
 public:
  /// Throws InvalidArgument when no example fits the budget.
  BatchStream(std::vector<Example> examples, std::size_t tokens_per_batch, std::uint64_t seed);

  std::vector<Example> next();
  std::size_t epoch() const { return epoch_; }
  const std::vector<Example>& examples() const { return examples_; }
  const std::vector<std::size_t>& skipped() const { return plan_.skipped; }

 private:
  std::vector<Example> examples_;
  std::size_t budget_;
  std::uint64_t seed_;
  std::size_t epoch_ = 0;
  std::size_t cursor_ = 0;
  BatchPlan plan_;
};

}  // namespace vega::train

#include "vega/train/batching.hpp"

#include <algorithm>
#include <numeric>

#include "vega/core/error.hpp"

namespace vega::train {

Example encode_pair(const corpus::SentencePair& pair, const subword::SubwordVocab& vocab) {
  Example ex;
  ex.src = vocab.encode(pair.src, pair.tgt_lang);
  ex.tgt = vocab.encode(pair.tgt);
  return ex;
}

std::vector<Example> encode_pairs(const std::vector<corpus::SentencePair>& pairs,
                                  const subword::SubwordVocab& vocab) {
  std::vector<Example> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) out.push_back(encode_pair(p, vocab));
  return out;
}

std::size_t example_tokens(const Example& example) {
  return std::max(example.src.size(), example.tgt.size() + 1);
}

BatchPlan make_batches(const std::vector<Example>& examples, std::size_t tokens_per_batch,
                       std::uint64_t seed) {
  if (tokens_per_batch == 0) throw InvalidArgument("make_batches: zero token budget");
  BatchPlan plan;
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(std::span(order));
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return example_tokens(examples[a]) < example_tokens(examples[b]);
  });

  Batch current;
  std::size_t longest = 0;
  for (std::size_t i : order) {
    const std::size_t len = example_tokens(examples[i]);
    if (len > tokens_per_batch) {
      plan.skipped.push_back(i);
      continue;
    }
    const std::size_t widest = std::max(longest, len);
    if (!current.indices.empty() && widest * (current.indices.size() + 1) > tokens_per_batch) {
      plan.batches.push_back(std::move(current));
      current = Batch{};
      longest = 0;
    }
    longest = std::max(longest, len);
    current.indices.push_back(i);
    current.padded_tokens = longest * current.indices.size();
  }
  if (!current.indices.empty()) plan.batches.push_back(std::move(current));
  rng.shuffle(std::span(plan.batches));
  std::sort(plan.skipped.begin(), plan.skipped.end());
  return plan;
}

BatchStream::BatchStream(std::vector<Example> examples, std::size_t tokens_per_batch, std::uint64_t seed)
    : examples_(std::move(examples)), budget_(tokens_per_batch), seed_(seed) {
  plan_ = make_batches(examples_, budget_, mix_seed(seed_, epoch_));
  if (plan_.batches.empty()) throw InvalidArgument("BatchStream: no example fits the token budget");
}

std::vector<Example> BatchStream::next() {
  if (cursor_ == plan_.batches.size()) {
    ++epoch_;
    cursor_ = 0;
    plan_ = make_batches(examples_, budget_, mix_seed(seed_, epoch_));
  }
  std::vector<Example> batch;
  for (std::size_t i : plan_.batches[cursor_].indices) batch.push_back(examples_[i]);
  ++cursor_;
  return batch;
}

}  // namespace vega::train

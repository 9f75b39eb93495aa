#pragma once

#include <array>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/core/text.hpp"

namespace vega::decode {

struct BleuReport {
  double score = 0.0;                   // 0..100
  std::array<double, 4> precisions{};   // smoothed, as fractions
  std::array<std::size_t, 4> matches{};
  std::array<std::size_t, 4> totals{};
  double brevity_penalty = 0.0;
  std::size_t hyp_length = 0;
  std::size_t ref_length = 0;

  nlohmann::json to_json() const;
};

/// Corpus-level 4-gram BLEU over whitespace tokens with one reference per
/// hypothesis. A zero match count at order n is replaced by 1 / (2^k * total)
/// for the k-th such order; an order with no hypothesis n-grams scores 0.
/// Throws InvalidArgument for mismatched or empty corpora.
BleuReport corpus_bleu(const std::vector<Sentence>& hypotheses,
                       const std::vector<Sentence>& references);

}  // namespace vega::decode

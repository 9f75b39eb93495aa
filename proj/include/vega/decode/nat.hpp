#pragma once

#include "vega/decode/beam.hpp"

namespace vega::decode {

/// Decodes the `top_lengths` most probable lengths in parallel (positionwise
/// argmax) and keeps the candidate with the best mean token log-probability.
/// Hypothesis::score holds that mean.
Hypothesis nat_decode(const model::Transformer<float>& model, const std::vector<TokenId>& src,
                      int top_lengths);

}  // namespace vega::decode

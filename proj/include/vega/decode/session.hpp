#pragma once

#include <memory>
#include <vector>

#include "vega/model/transformer.hpp"

namespace vega::decode {

using model::TokenId;
using numerics::Index;
using numerics::Tensor;

/// Incremental next-token scorer over a set of hypotheses sharing one source.
/// Starts with one empty hypothesis; step() replaces the set.
class DecodeSession {
 public:
  virtual ~DecodeSession() = default;
  virtual int vocab_size() const = 0;
  /// New hypothesis i extends old hypothesis parents[i] by tokens[i]. Returns
  /// next-token log-probabilities, one row per new hypothesis.
  virtual Tensor<float> step(const std::vector<std::size_t>& parents,
                             const std::vector<TokenId>& tokens) = 0;
};

/// Session over one AT model.
std::unique_ptr<DecodeSession> start_session(const model::Transformer<float>& model,
                                             const std::vector<TokenId>& src);

}  // namespace vega::decode

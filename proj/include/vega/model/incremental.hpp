#pragma once

#include <vector>

#include "vega/model/transformer.hpp"

namespace vega::model {

/// Step-wise AT decoding with cached self-attention keys/values. Holds a set
/// of hypotheses that all share one source sentence; starts with a single
/// empty hypothesis.
template <typename Scalar>
class IncrementalDecoder {
 public:
  using T = Tensor<Scalar>;

  /// Throws InvalidState for a NAT model.
  IncrementalDecoder(const Transformer<Scalar>& model, const std::vector<TokenId>& src);

  std::size_t hypotheses() const { return steps_.size(); }
  int vocab_size() const { return model_->config().vocab; }

  /// New hypothesis i is old hypothesis parents[i] extended by tokens[i].
  /// Returns next-token log-probabilities, one row per new hypothesis.
  T step(const std::vector<std::size_t>& parents, const std::vector<TokenId>& tokens);

 private:
  struct LayerCache {
    T keys;
    T values;
  };

  const Transformer<Scalar>* model_;
  std::vector<T> cross_keys_;    // per layer
  std::vector<T> cross_values_;  // per layer
  // cache_[hyp][layer]
  std::vector<std::vector<LayerCache>> cache_;
  std::vector<Index> steps_;
};

extern template class IncrementalDecoder<float>;
extern template class IncrementalDecoder<double>;

}  // namespace vega::model

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "vega/core/random.hpp"
#include "vega/model/config.hpp"
#include "vega/numerics/kernels.hpp"
#include "vega/numerics/tape.hpp"
#include "vega/subword/vocab.hpp"

namespace vega::model {

using numerics::Index;
using numerics::Parameter;
using numerics::Tape;
using numerics::Tensor;
using numerics::Var;
using subword::TokenId;

/// One training pair in id space. `src` is the full encoder input (language
/// tag included); `tgt` carries no BOS/EOS. AT decoders read [start] + tgt and
/// predict tgt + [EOS]; NAT decoders predict tgt from positions alone.
struct Example {
  std::vector<TokenId> src;
  std::vector<TokenId> tgt;
  TokenId start = subword::kBos;
};

struct LossStats {
  Var loss;
  double nll = 0.0;  // summed token NLL, unsmoothed
  std::size_t tokens = 0;
  double length_nll = 0.0;  // NAT only
};

/// P(T | x) over the lengths [min_length, min_length + probs.size()).
struct LengthDistribution {
  int min_length = 1;
  std::vector<double> probs;

  int argmax() const;
  double prob(int length) const;
  int max_length() const { return min_length + static_cast<int>(probs.size()) - 1; }
};

/// Pre-norm encoder-decoder with one embedding table shared by encoder input,
/// decoder input and the output projection.
template <typename Scalar>
class Transformer {
 public:
  using T = Tensor<Scalar>;

  Transformer(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::vector<Parameter<Scalar>>& parameters() { return params_; }
  const std::vector<Parameter<Scalar>>& parameters() const { return params_; }
  /// Throws NotFound for an unknown name.
  Parameter<Scalar>& parameter(const std::string& name);
  const Parameter<Scalar>& parameter(const std::string& name) const;
  bool has_parameter(const std::string& name) const { return index_.count(name) != 0; }
  void zero_grad();
  /// Throws InvalidArgument outside [0, 1).
  void set_dropout(double rate);

  /// Row t is the next-token distribution after tgt_prefix[0..t]. Dropout is
  /// off. Throws InvalidState on a NAT model.
  T forward_at(const std::vector<TokenId>& src, const std::vector<TokenId>& tgt_prefix) const;

  /// tgt_len independent distributions. Throws InvalidState on an AT model and
  /// InvalidArgument when tgt_len < 1.
  T forward_nat(const std::vector<TokenId>& src, int tgt_len) const;

  /// Throws InvalidState on an AT model.
  LengthDistribution predict_length(const std::vector<TokenId>& src) const;

  /// Final encoder states for one sentence (eval mode).
  T encode(const std::vector<TokenId>& src) const;

  /// Builds the training loss of a batch on `tape`: mean label-smoothed token
  /// cross-entropy, plus 0.1 x the length cross-entropy for NAT. Dropout is
  /// applied only when `dropout_rng` is non-null.
  LossStats loss(Tape<Scalar>& tape, const std::vector<Example>& batch, double label_smoothing,
                 Rng* dropout_rng);

 private:
  struct Graph;

  void add_parameter(const std::string& name, Index rows, Index cols);
  Var encoder(Graph& g, const std::vector<std::vector<TokenId>>& srcs) const;
  Var decoder(Graph& g, Var enc, const std::vector<Index>& src_lengths, Var input,
              const std::vector<Index>& tgt_lengths, bool causal) const;
  Var block_attention(Graph& g, const std::string& prefix, Var xq, Var xkv,
                      const numerics::AttentionLayout& layout) const;
  Var feed_forward(Graph& g, const std::string& prefix, Var x) const;
  Var norm(Graph& g, const std::string& prefix, Var x) const;
  Var embed_tokens(Graph& g, const std::vector<std::vector<TokenId>>& seqs) const;
  Var length_logits(Graph& g, Var enc, const std::vector<Index>& src_lengths) const;

  ModelConfig config_;
  std::vector<Parameter<Scalar>> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

extern template class Transformer<float>;
extern template class Transformer<double>;

/// Maps length-logit row to a distribution over valid lengths for a source of
/// length `src_len`: offsets that would give a length < 1 are dropped and the
/// rest renormalised.
template <typename Scalar>
LengthDistribution length_distribution(const Tensor<Scalar>& logits, int src_len, int offsets);

}  // namespace vega::model

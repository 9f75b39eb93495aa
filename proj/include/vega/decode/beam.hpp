#pragma once

#include <memory>
#include <vector>

#include "vega/decode/session.hpp"

namespace vega::decode {

struct BeamConfig {
  int beam_size = 4;
  double length_penalty = 0.6;
  double max_len_factor = 2.0;
  /// Absolute cap on generated tokens; 0 derives it as
  /// ceil(max_len_factor * |src|) + 5.
  int max_len = 0;

  /// Throws InvalidArgument unless beam_size >= 1, length_penalty >= 0 and
  /// the length limits are usable.
  void validate() const;
  int max_length(std::size_t src_len) const;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // without EOS
  double logprob = 0.0;
  /// logprob / length^alpha, length counting the EOS when present.
  double score = 0.0;
  bool finished = false;  // ended with EOS rather than at the length cap
};

/// Length-normalised score used by beam search.
double normalized_score(double logprob, std::size_t length, double alpha);

/// True for ids never generated: <pad> and <s>.
bool is_banned(TokenId id);

/// Beam search: each step keeps the beam_size best candidates over all
/// expansions; candidates ending in EOS leave the beam as finished. At the
/// length cap the survivors finish unterminated. Returns the finished
/// hypothesis with the best normalised score.
Hypothesis beam_search(DecodeSession& session, std::size_t src_len, const BeamConfig& config,
                       TokenId start);

/// Argmax decoding until EOS or the length cap.
Hypothesis greedy_decode(DecodeSession& session, std::size_t src_len, const BeamConfig& config,
                         TokenId start);

/// Convenience wrappers over one AT model. Throw InvalidArgument on an empty
/// source.
Hypothesis beam_search(const model::Transformer<float>& model, const std::vector<TokenId>& src,
                       const BeamConfig& config, TokenId start);
Hypothesis greedy_decode(const model::Transformer<float>& model, const std::vector<TokenId>& src,
                         const BeamConfig& config, TokenId start);

}  // namespace vega::decode

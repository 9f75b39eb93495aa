#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/decode/translator.hpp"

namespace vega::adapt {

using decode::Index;
using decode::Tensor;
using decode::TokenId;

using ModelPtr = std::shared_ptr<const model::Transformer<float>>;

enum class Combine { probability, log_probability };

std::string to_string(Combine combine);
Combine combine_from_string(const std::string& name);

/// A named candidate model, typically one checkpoint.
struct Candidate {
  std::string id;
  ModelPtr model;
};

struct EnsembleSpec {
  std::vector<std::string> members;  // candidate ids, in selection order
  Combine combine = Combine::probability;
};

void to_json(nlohmann::json& j, const EnsembleSpec& spec);
void from_json(const nlohmann::json& j, EnsembleSpec& spec);

/// Combines per-member log-probability rows [n x V] into normalised
/// log-probabilities of the ensemble.
Tensor<float> combine_log_probs(const std::vector<Tensor<float>>& members, Combine combine);

/// Next-token distribution is the arithmetic mean of the members'
/// probabilities (or the renormalised mean of their log-probabilities).
/// Throws InvalidArgument for no members, a NAT member or a vocabulary
/// mismatch.
std::unique_ptr<decode::DecodeSession> ensemble_session(const std::vector<ModelPtr>& members,
                                                        const std::vector<TokenId>& src,
                                                        Combine combine = Combine::probability);

decode::Hypothesis ensemble_decode(const std::vector<ModelPtr>& members, const std::vector<TokenId>& src,
                                   const decode::BeamConfig& beam, Combine combine = Combine::probability);

/// Members of `spec` looked up by id; throws NotFound for an unknown id.
std::vector<ModelPtr> resolve(const EnsembleSpec& spec, const std::vector<Candidate>& candidates);

decode::Translator ensemble_translator(const std::vector<ModelPtr>& members,
                                       std::shared_ptr<const subword::SubwordVocab> vocab,
                                       const std::string& src_lang, const std::string& tgt_lang,
                                       const decode::DecodeOptions& options = {},
                                       Combine combine = Combine::probability);

struct SelectionStep {
  std::vector<std::string> members;
  double dev_bleu = 0.0;
  bool accepted = false;
};

struct Selection {
  EnsembleSpec spec;
  double dev_bleu = 0.0;
  double best_single_bleu = 0.0;
  std::vector<SelectionStep> log;  // every subset scored, in evaluation order
};

/// Starts from the best single candidate by dev BLEU, then repeatedly adds
/// the unused candidate that maximises dev BLEU while that strictly improves
/// it and the ensemble is smaller than max_size. Ties go to the earlier
/// candidate. Throws InvalidArgument for no candidates, an empty dev set or
/// max_size < 1.
Selection greedy_select(const std::vector<Candidate>& candidates, const std::vector<corpus::SentencePair>& dev,
                        std::shared_ptr<const subword::SubwordVocab> vocab, std::size_t max_size,
                        const decode::DecodeOptions& options = {}, Combine combine = Combine::probability);

}  // namespace vega::adapt

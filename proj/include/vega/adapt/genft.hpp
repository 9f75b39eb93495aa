#pragma once

#include <string>
#include <vector>

#include "vega/corpus/corpus_io.hpp"
#include "vega/decode/translator.hpp"
#include "vega/numerics/checkpoint.hpp"
#include "vega/train/config.hpp"

namespace vega::adapt {

/// Unlabelled test-side source sentences of one domain.
struct DomainSeed {
  std::string id;
  std::vector<Sentence> sentences;
};

struct GenFtConfig {
  int max_iters = 3;
  double convergence_delta = 0.1;
  /// Base pairs mixed in per pseudo pair.
  double base_ratio = 1.0;
  train::TrainConfig train;
  decode::DecodeOptions decode;
  std::uint64_t seed = 1;
};

struct GenFtIteration {
  int iteration = 0;
  std::size_t pseudo_pairs = 0;
  std::size_t base_pairs = 0;
  double dev_bleu = 0.0;
};

struct GenFtResult {
  numerics::Checkpoint model;
  double initial_dev_bleu = 0.0;
  std::vector<GenFtIteration> iterations;
  bool converged = false;
};

/// Iterative transductive finetuning with a fixed ensemble: every iteration
/// translates all seeds with `ensemble`, mixes in base pairs at base_ratio,
/// and continues training the model on the union. Stops after max_iters or
/// once dev BLEU improves by less than convergence_delta. Throws
/// InvalidArgument for empty or duplicate seeds.
GenFtResult generalization_finetune(const numerics::Checkpoint& model, const std::vector<DomainSeed>& seeds,
                                    const decode::Translator& ensemble,
                                    const std::vector<corpus::SentencePair>& base,
                                    const std::vector<corpus::SentencePair>& dev,
                                    std::shared_ptr<const subword::SubwordVocab> vocab, const GenFtConfig& config,
                                    corpus::PipelineManifest* manifest = nullptr);

}  // namespace vega::adapt

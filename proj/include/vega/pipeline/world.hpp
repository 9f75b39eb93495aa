#pragma once

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/corpus/toy_language.hpp"
#include "vega/subword/vocab.hpp"
#include "vega/train/trainer.hpp"

namespace vega::pipeline {

/// A toy language family with pivot-centred splits and one joint vocabulary.
struct WorldConfig {
  std::uint64_t seed = 7;
  std::size_t concept_vocab = 300;
  corpus::GenerationOptions generation = [] {
    corpus::GenerationOptions g;
    g.max_clauses = 1;
    g.concept_limit = 80;
    return g;
  }();
  std::vector<std::string> languages = {"L1", "L2", "L3", "L4", "L5"};
  /// Train pairs per pivot direction, aligned with `languages`.
  std::vector<std::size_t> train_sizes = {250, 200, 150, 120, 100};
  std::size_t dev_size = 100;
  std::size_t test_size = 100;
  std::size_t bpe_merges = 600;

  void validate() const;
};

void to_json(nlohmann::json& j, const WorldConfig& c);
void from_json(const nlohmann::json& j, WorldConfig& c);

struct World {
  WorldConfig config;
  std::vector<corpus::ToyLanguage> family;  // pivot "E" first
  /// Keyed by direction "E-L1"; pivot on the source side.
  train::ParallelData train;
  train::ParallelData dev;
  train::ParallelData test;
  std::shared_ptr<const subword::SubwordVocab> vocab;

  const corpus::ToyLanguage& language(const std::string& id) const;
  /// Pairs of `split` for src -> tgt, flipped from the pivot-centred split when
  /// src is not the pivot. Throws NotFound for an unknown direction.
  std::vector<corpus::SentencePair> pairs(const std::string& split, const std::string& src,
                                          const std::string& tgt) const;
};

World build_world(const WorldConfig& config);

/// Training defaults for desk-scale runs: 512-token batches, peak 2e-3.
train::TrainConfig desk_train_config();

inline constexpr const char* kPivot = "E";

/// `defaults` with the fields present in `patch` replaced.
template <typename T>
T overlay(const T& defaults, const nlohmann::json& patch) {
  nlohmann::json j = defaults;
  j.merge_patch(patch);
  return j.get<T>();
}

}  // namespace vega::pipeline

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/decode/translator.hpp"
#include "vega/model/config.hpp"
#include "vega/pipeline/world.hpp"
#include "vega/train/config.hpp"

namespace vega::pipeline {

using Progress = std::function<void(const std::string&)>;

struct TransferConfig {
  WorldConfig world;
  model::ModelConfig model = model::ModelConfig::tiny(0);  // vocab filled from the world
  train::TrainConfig train = desk_train_config();
  train::DirectionSet direction_set = train::DirectionSet::M2O;
  double temperature = 5.0;
  int pretrain_updates = 1000;
  int finetune_updates = 400;
  int embedding_ratio = 1;
  int full_ratio = 4;
  decode::DecodeOptions decode = [] {
    decode::DecodeOptions d;
    d.greedy = true;
    return d;
  }();
};

void to_json(nlohmann::json& j, const TransferConfig& c);
void from_json(const nlohmann::json& j, TransferConfig& c);

struct TransferRow {
  std::string direction;
  std::size_t train_pairs = 0;
  int updates = 0;  // per system, equal for both
  double baseline_dev_bleu = 0.0;
  double pretrained_dev_bleu = 0.0;  // multi-directional model before finetuning
  double transfer_dev_bleu = 0.0;
  double baseline_test_bleu = 0.0;
  double transfer_test_bleu = 0.0;
};

struct TransferReport {
  std::vector<TransferRow> rows;
  /// Directions where pretrain + finetune beats the baseline on dev BLEU.
  std::size_t wins() const;
  nlohmann::json to_json() const;
};

/// Multi-directional pretraining then specific-directional finetuning per
/// direction, against bilingual models trained from scratch for the same
/// total number of updates. O2M evaluates pivot -> L, M2O evaluates L -> pivot.
TransferReport run_transfer_experiment(const TransferConfig& config, const std::string& run_dir = {},
                                       const Progress& progress = {});

}  // namespace vega::pipeline

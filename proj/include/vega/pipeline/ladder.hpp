#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "vega/decode/translator.hpp"
#include "vega/model/config.hpp"
#include "vega/pipeline/transfer.hpp"
#include "vega/pipeline/world.hpp"
#include "vega/train/config.hpp"

namespace vega::pipeline {

/// Ladder steps in order; each reuses everything built by the ones before.
const std::vector<std::string>& ladder_steps();

/// Default world with a higher share of number literals.
WorldConfig ladder_world();

struct LadderConfig {
  WorldConfig world = ladder_world();
  std::string src_lang = "L1";
  std::string tgt_lang = "E";
  /// A prefix of ladder_steps(); empty means all.
  std::vector<std::string> steps;
  model::ModelConfig model = model::ModelConfig::tiny(0);
  train::TrainConfig train = desk_train_config();
  int baseline_updates = 1400;
  int pretrain_updates = 1000;
  int finetune_updates = 400;
  double temperature = 5.0;
  int self_training_rounds = 1;
  int teacher_updates = 300;
  int student_updates = 600;
  std::size_t mono_size = 500;  // per side
  std::size_t ensemble_max = 3;
  int genft_iters = 2;
  int genft_updates = 200;
  decode::DecodeOptions decode = [] {
    decode::DecodeOptions d;
    d.greedy = true;
    return d;
  }();

  /// Throws InvalidArgument for an unknown or out-of-order step, or a
  /// direction the world does not contain.
  void validate() const;
  std::vector<std::string> active_steps() const;
};

void to_json(nlohmann::json& j, const LadderConfig& c);
void from_json(const nlohmann::json& j, LadderConfig& c);

struct LadderRow {
  std::string step;
  double dev_bleu = 0.0;
  double test_bleu = 0.0;
  double delta_dev = 0.0;  // over the baseline row
  double delta_test = 0.0;
  std::size_t number_mismatches = 0;  // test hypotheses against their sources
  nlohmann::json details = nlohmann::json::object();
};

struct AblationLadder {
  std::string direction;
  std::vector<LadderRow> rows;
  nlohmann::json to_json() const;
};

AblationLadder ablate(const LadderConfig& config, const std::string& run_dir = {}, const Progress& progress = {});

}  // namespace vega::pipeline

#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace vega::train {

enum class Schedule { cosine, inverse_sqrt };

struct TrainConfig {
  std::size_t tokens_per_batch = 1024;
  int warmup_steps = 40;
  int total_steps = 1000;
  double peak_lr = 1e-3;
  Schedule schedule = Schedule::cosine;
  double label_smoothing = 0.1;
  double weight_decay = 0.01;
  double dropout = 0.1;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double adam_eps = 1e-9;
  /// Global gradient-norm clip; 0 disables it.
  double clip_norm = 0.0;
  /// Updates between checkpoints; 0 means total_steps / 20.
  int checkpoint_every = 0;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument unless 0 <= warmup <= total, peak_lr > 0 and the
  /// remaining fields are in range.
  void validate() const;
  int checkpoint_interval() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Learning rate for update `step` (>= 0): linear 0 -> peak over warmup, then
/// cosine peak -> 0 at total_steps (or inverse square root decay).
double lr_at(const TrainConfig& config, std::int64_t step);

}  // namespace vega::train

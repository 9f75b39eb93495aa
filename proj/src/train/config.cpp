#include "vega/train/config.hpp"

#include <cmath>
#include <numbers>

#include "vega/core/error.hpp"

namespace vega::train {

void TrainConfig::validate() const {
  if (warmup_steps < 0 || total_steps < 1 || warmup_steps > total_steps) {
    throw InvalidArgument("train config: need 0 <= warmup_steps <= total_steps, total >= 1");
  }
  if (!(peak_lr > 0.0)) throw InvalidArgument("train config: peak_lr must be > 0");
  if (tokens_per_batch < 1) throw InvalidArgument("train config: tokens_per_batch must be >= 1");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) {
    throw InvalidArgument("train config: label_smoothing not in [0,1)");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("train config: dropout not in [0,1)");
  if (weight_decay < 0.0 || clip_norm < 0.0 || checkpoint_every < 0) {
    throw InvalidArgument("train config: negative weight_decay, clip_norm or checkpoint_every");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && adam_eps > 0.0)) {
    throw InvalidArgument("train config: bad Adam hyperparameters");
  }
}

int TrainConfig::checkpoint_interval() const {
  if (checkpoint_every > 0) return checkpoint_every;
  return std::max(1, total_steps / 20);
}

namespace {
std::string schedule_name(Schedule s) { return s == Schedule::cosine ? "cosine" : "inverse_sqrt"; }
Schedule schedule_from(const std::string& s) {
  if (s == "cosine") return Schedule::cosine;
  if (s == "inverse_sqrt") return Schedule::inverse_sqrt;
  throw InvalidArgument("unknown schedule '" + s + "'");
}
}  // namespace

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"tokens_per_batch", c.tokens_per_batch},
       {"warmup_steps", c.warmup_steps},
       {"total_steps", c.total_steps},
       {"peak_lr", c.peak_lr},
       {"schedule", schedule_name(c.schedule)},
       {"label_smoothing", c.label_smoothing},
       {"weight_decay", c.weight_decay},
       {"dropout", c.dropout},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"adam_eps", c.adam_eps},
       {"clip_norm", c.clip_norm},
       {"checkpoint_every", c.checkpoint_every},
       {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  TrainConfig d;
  c.tokens_per_batch = j.value("tokens_per_batch", d.tokens_per_batch);
  c.warmup_steps = j.value("warmup_steps", d.warmup_steps);
  c.total_steps = j.value("total_steps", d.total_steps);
  c.peak_lr = j.value("peak_lr", d.peak_lr);
  c.schedule = schedule_from(j.value("schedule", std::string("cosine")));
  c.label_smoothing = j.value("label_smoothing", d.label_smoothing);
  c.weight_decay = j.value("weight_decay", d.weight_decay);
  c.dropout = j.value("dropout", d.dropout);
  c.beta1 = j.value("beta1", d.beta1);
  c.beta2 = j.value("beta2", d.beta2);
  c.adam_eps = j.value("adam_eps", d.adam_eps);
  c.clip_norm = j.value("clip_norm", d.clip_norm);
  c.checkpoint_every = j.value("checkpoint_every", d.checkpoint_every);
  c.seed = j.value("seed", d.seed);
}

double lr_at(const TrainConfig& c, std::int64_t step) {
  if (step < 0) throw InvalidArgument("lr_at: negative step");
  const double s = static_cast<double>(step);
  const double w = static_cast<double>(c.warmup_steps);
  if (step < c.warmup_steps) return c.peak_lr * s / w;
  if (c.schedule == Schedule::inverse_sqrt) {
    return c.warmup_steps == 0 ? c.peak_lr / std::sqrt(std::max(1.0, s))
                               : c.peak_lr * std::sqrt(w / std::max(w, s));
  }
  const double span = static_cast<double>(c.total_steps - c.warmup_steps);
  if (step >= c.total_steps || span <= 0) return step >= c.total_steps ? 0.0 : c.peak_lr;
  return c.peak_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * (s - w) / span));
}

}  // namespace vega::train

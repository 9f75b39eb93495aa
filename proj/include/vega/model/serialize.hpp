#pragma once

#include "vega/model/transformer.hpp"
#include "vega/numerics/checkpoint.hpp"

namespace vega::model {

/// Snapshot of all parameters; the config is stored under meta["config"].
numerics::Checkpoint to_checkpoint(const Transformer<float>& model, std::int64_t step,
                                   nlohmann::json meta = nlohmann::json::object());

/// Rebuilds a model from a checkpoint written by to_checkpoint.
Transformer<float> from_checkpoint(const numerics::Checkpoint& ckpt);

/// Copies checkpoint tensors into a model with the same parameter layout.
void load_weights(Transformer<float>& model, const numerics::Checkpoint& ckpt);

template <typename To, typename From>
Transformer<To> cast_model(const Transformer<From>& model) {
  Transformer<To> out(model.config(), 0);
  for (std::size_t i = 0; i < model.parameters().size(); ++i) {
    out.parameters()[i].value = model.parameters()[i].value.template cast<To>();
  }
  return out;
}

}  // namespace vega::model

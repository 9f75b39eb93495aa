#include "vega/model/serialize.hpp"

#include "vega/core/error.hpp"

namespace vega::model {

numerics::Checkpoint to_checkpoint(const Transformer<float>& model, std::int64_t step,
                                   nlohmann::json meta) {
  numerics::Checkpoint ckpt;
  ckpt.step = step;
  ckpt.meta = std::move(meta);
  ckpt.meta["config"] = model.config();
  for (const auto& p : model.parameters()) ckpt.tensors.push_back({p.name, p.value});
  return ckpt;
}

void load_weights(Transformer<float>& model, const numerics::Checkpoint& ckpt) {
  if (ckpt.tensors.size() != model.parameters().size()) {
    throw InvalidArgument("checkpoint holds " + std::to_string(ckpt.tensors.size()) +
                          " tensors, model expects " + std::to_string(model.parameters().size()));
  }
  for (auto& p : model.parameters()) {
    const auto& t = ckpt.tensor(p.name);
    numerics::require_same_shape(numerics::shape_of(t), numerics::shape_of(p.value), p.name.c_str());
    p.value = t;
  }
}

Transformer<float> from_checkpoint(const numerics::Checkpoint& ckpt) {
  if (!ckpt.meta.contains("config")) throw InvalidArgument("checkpoint carries no model config");
  Transformer<float> model(ckpt.meta.at("config").get<ModelConfig>(), 0);
  load_weights(model, ckpt);
  return model;
}

}  // namespace vega::model

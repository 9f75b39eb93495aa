#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "vega/numerics/tensor.hpp"

namespace vega::numerics {

struct NamedTensor {
  std::string name;
  Tensor<float> value;
};

/// On disk: "VGCK", a little-endian uint64 header length, a JSON header
/// {format, step, tensors: [{name, shape, offset}], meta}, then the tensors
/// as little-endian float32 in header order.
struct Checkpoint {
  std::int64_t step = 0;
  std::vector<NamedTensor> tensors;
  nlohmann::json meta = nlohmann::json::object();

  /// Throws NotFound for a missing name.
  const Tensor<float>& tensor(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// Throws NotFound when the file is missing, InvalidArgument when malformed.
Checkpoint load_checkpoint(const std::string& path);

/// Elementwise mean of checkpoints with identical tensor names and shapes.
Checkpoint average_checkpoints(const std::vector<Checkpoint>& ckpts);

}  // namespace vega::numerics

#pragma once

#include <string>
#include <vector>

#include "vega/model/transformer.hpp"

namespace vega::model {

struct TensorCheck {
  std::string name;
  std::size_t probed = 0;
  double max_error = 0.0;
};

/// Central-difference check of the full training loss (dropout off) against
/// the tape gradient. Every parameter tensor is probed at up to
/// `per_tensor` random coordinates.
std::vector<TensorCheck> model_gradient_check(Transformer<double>& model,
                                              const std::vector<Example>& batch,
                                              double label_smoothing, double step,
                                              std::size_t per_tensor, std::uint64_t seed);

}  // namespace vega::model

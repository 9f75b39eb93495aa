#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "vega/numerics/tensor.hpp"

namespace vega::train {

using numerics::Parameter;
using numerics::Tensor;

/// Selects the parameters an update may touch; an empty filter means all.
using ParamFilter = std::function<bool(const std::string&)>;

/// Adam with decoupled weight decay. Decay is applied to matrices only
/// (tensors with more than one row and column); biases and norm gains are not
/// decayed. Each tensor keeps its own step counter, so a frozen tensor starts
/// bias correction from 1 when it is first updated.
template <typename Scalar>
class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay);

  void step(std::vector<Parameter<Scalar>>& params, double lr, const ParamFilter& trainable = {});
  std::int64_t steps(const std::string& name) const;

 private:
  struct State {
    Tensor<Scalar> m;
    Tensor<Scalar> v;
    std::int64_t t = 0;
  };
  double beta1_;
  double beta2_;
  double eps_;
  double weight_decay_;
  std::unordered_map<std::string, State> state_;
};

extern template class AdamW<float>;
extern template class AdamW<double>;

/// Scales every gradient so the global L2 norm is at most max_norm; returns
/// the norm before clipping.
template <typename Scalar>
double clip_gradients(std::vector<Parameter<Scalar>>& params, double max_norm,
                      const ParamFilter& trainable = {});

}  // namespace vega::train

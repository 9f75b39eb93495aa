#include "vega/train/optimizer.hpp"

#include <cmath>

#include "vega/core/error.hpp"

namespace vega::train {

template <typename Scalar>
AdamW<Scalar>::AdamW(double beta1, double beta2, double eps, double weight_decay)
    : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1 && eps > 0 && weight_decay >= 0)) {
    throw InvalidArgument("AdamW: bad hyperparameters");
  }
}

template <typename Scalar>
void AdamW<Scalar>::step(std::vector<Parameter<Scalar>>& params, double lr, const ParamFilter& trainable) {
  for (auto& p : params) {
    if (trainable && !trainable(p.name)) continue;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) continue;
    auto& s = state_[p.name];
    if (s.t == 0) {
      s.m.setZero(p.value.rows(), p.value.cols());
      s.v.setZero(p.value.rows(), p.value.cols());
    }
    ++s.t;
    const auto b1 = static_cast<Scalar>(beta1_);
    const auto b2 = static_cast<Scalar>(beta2_);
    s.m = b1 * s.m + (Scalar(1) - b1) * p.grad;
    s.v = b2 * s.v + (Scalar(1) - b2) * p.grad.cwiseProduct(p.grad);
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(s.t));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(s.t));
    if (weight_decay_ > 0 && p.value.rows() > 1 && p.value.cols() > 1) {
      p.value *= static_cast<Scalar>(1.0 - lr * weight_decay_);
    }
    const auto step = static_cast<Scalar>(lr / c1);
    const auto root_c2 = static_cast<Scalar>(std::sqrt(c2));
    p.value.array() -= step * s.m.array() / (s.v.array().sqrt() / root_c2 + static_cast<Scalar>(eps_));
  }
}

template <typename Scalar>
std::int64_t AdamW<Scalar>::steps(const std::string& name) const {
  const auto it = state_.find(name);
  return it == state_.end() ? 0 : it->second.t;
}

template <typename Scalar>
double clip_gradients(std::vector<Parameter<Scalar>>& params, double max_norm, const ParamFilter& trainable) {
  double sq = 0;
  for (const auto& p : params) {
    if (trainable && !trainable(p.name)) continue;
    if (p.grad.size() > 0) sq += static_cast<double>(p.grad.squaredNorm());
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0 && norm > max_norm) {
    const auto scale = static_cast<Scalar>(max_norm / norm);
    for (auto& p : params) {
      if (trainable && !trainable(p.name)) continue;
      if (p.grad.size() > 0) p.grad *= scale;
    }
  }
  return norm;
}

template class AdamW<float>;
template class AdamW<double>;
template double clip_gradients<float>(std::vector<Parameter<float>>&, double, const ParamFilter&);
template double clip_gradients<double>(std::vector<Parameter<double>>&, double, const ParamFilter&);

}  // namespace vega::train

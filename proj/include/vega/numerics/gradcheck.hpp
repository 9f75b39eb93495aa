#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "vega/numerics/tape.hpp"

namespace vega::numerics {

/// Builds a scalar loss on `tape` from the parameter leaf it is handed.
template <typename Scalar>
using LossBuilder = std::function<Var(Tape<Scalar>&, Var param)>;

/// Compares the tape gradient of `f` at `params` against central finite
/// differences with the given step. Returns the largest elementwise error
/// |analytic - numeric| / max(1, |analytic|, |numeric|).
///
/// Throws InvalidArgument for a non-positive step and NumericError when f
/// produces a non-finite value.
/// Only the flat coordinates listed in `coords` are probed.
template <typename Scalar>
double finite_difference_check(const LossBuilder<Scalar>& f, const Tensor<Scalar>& params,
                               double step, const std::vector<Index>& coords) {
  if (!(step > 0.0)) throw InvalidArgument("finite_difference_check: step must be > 0");

  Parameter<Scalar> p{"x", params, {}};
  Tensor<Scalar> analytic;
  {
    Tape<Scalar> tape;
    Var loss = f(tape, tape.parameter(p));
    if (!std::isfinite(static_cast<double>(tape.value(loss)(0, 0)))) {
      throw NumericError("finite_difference_check: loss is not finite");
    }
    tape.backward(loss);
    analytic = p.grad;
  }

  auto evaluate = [&](const Tensor<Scalar>& at) {
    Parameter<Scalar> q{"x", at, {}};
    Tape<Scalar> tape(false);
    const double v = static_cast<double>(tape.value(f(tape, tape.parameter(q)))(0, 0));
    if (!std::isfinite(v)) throw NumericError("finite_difference_check: loss is not finite");
    return v;
  };

  double worst = 0.0;
  Tensor<Scalar> probe = params;
  for (Index i : coords) {
    if (i < 0 || i >= params.size()) throw InvalidArgument("finite_difference_check: bad coordinate");
    const Scalar original = probe.data()[i];
    probe.data()[i] = static_cast<Scalar>(static_cast<double>(original) + step);
    const double up = evaluate(probe);
    probe.data()[i] = static_cast<Scalar>(static_cast<double>(original) - step);
    const double down = evaluate(probe);
    probe.data()[i] = original;
    const double numeric = (up - down) / (2.0 * step);
    const double a = static_cast<double>(analytic.data()[i]);
    const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
    worst = std::max(worst, err);
  }
  return worst;
}

/// Probes every coordinate.
template <typename Scalar>
double finite_difference_check(const LossBuilder<Scalar>& f, const Tensor<Scalar>& params,
                               double step) {
  std::vector<Index> all(static_cast<std::size_t>(params.size()));
  for (Index i = 0; i < params.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  return finite_difference_check(f, params, step, all);
}

}  // namespace vega::numerics

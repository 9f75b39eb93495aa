#include "vega/model/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "vega/core/error.hpp"

namespace vega::model {

std::vector<TensorCheck> model_gradient_check(Transformer<double>& model,
                                              const std::vector<Example>& batch,
                                              double label_smoothing, double step,
                                              std::size_t per_tensor, std::uint64_t seed) {
  if (!(step > 0.0)) throw InvalidArgument("model_gradient_check: step must be > 0");
  auto evaluate = [&] {
    Tape<double> tape(false);
    const double v = tape.value(model.loss(tape, batch, label_smoothing, nullptr).loss)(0, 0);
    if (!std::isfinite(v)) throw NumericError("model_gradient_check: loss is not finite");
    return v;
  };

  model.zero_grad();
  {
    Tape<double> tape;
    tape.backward(model.loss(tape, batch, label_smoothing, nullptr).loss);
  }

  Rng rng(seed);
  std::vector<TensorCheck> out;
  for (auto& p : model.parameters()) {
    TensorCheck check{p.name, 0, 0.0};
    const auto n = static_cast<std::uint64_t>(p.value.size());
    std::vector<Index> coords;
    if (n <= per_tensor) {
      for (std::uint64_t i = 0; i < n; ++i) coords.push_back(static_cast<Index>(i));
    } else {
      for (std::size_t i = 0; i < per_tensor; ++i) coords.push_back(static_cast<Index>(rng.index(n)));
    }
    for (Index i : coords) {
      double& x = p.value.data()[i];
      const double original = x;
      x = original + step;
      const double up = evaluate();
      x = original - step;
      const double down = evaluate();
      x = original;
      const double numeric = (up - down) / (2.0 * step);
      const double a = p.grad.data()[i];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      check.max_error = std::max(check.max_error, err);
      ++check.probed;
    }
    out.push_back(check);
  }
  return out;
}

}  // namespace vega::model

#include "vega/decode/nat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vega/core/error.hpp"

namespace vega::decode {

Hypothesis nat_decode(const model::Transformer<float>& model, const std::vector<TokenId>& src,
                      int top_lengths) {
  if (src.empty()) throw InvalidArgument("nat_decode: empty source");
  if (top_lengths < 1) throw InvalidArgument("nat_decode: top_lengths must be >= 1");
  const auto dist = model.predict_length(src);
  std::vector<int> order(dist.probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return dist.probs[static_cast<std::size_t>(a)] > dist.probs[static_cast<std::size_t>(b)]; });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(top_lengths)));

  Hypothesis best;
  bool have = false;
  for (int i : order) {
    const int len = dist.min_length + i;
    const auto probs = model.forward_nat(src, len);
    Hypothesis h;
    h.finished = true;
    for (Index r = 0; r < probs.rows(); ++r) {
      Index arg = -1;
      for (Index v = 0; v < probs.cols(); ++v) {
        if (is_banned(static_cast<TokenId>(v))) continue;
        if (arg < 0 || probs(r, v) > probs(r, arg)) arg = v;
      }
      h.tokens.push_back(static_cast<TokenId>(arg));
      h.logprob += std::log(static_cast<double>(probs(r, arg)));
    }
    h.score = h.logprob / static_cast<double>(len);
    if (!have || h.score > best.score) {
      best = std::move(h);
      have = true;
    }
  }
  return best;
}

}  // namespace vega::decode

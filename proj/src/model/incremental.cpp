#include "vega/model/incremental.hpp"

#include <cmath>

#include "vega/core/error.hpp"
#include "vega/numerics/kernels.hpp"

namespace vega::model {

namespace k = numerics::kernels;

namespace {

template <typename Scalar>
Tensor<Scalar> affine(const Transformer<Scalar>& m, const std::string& prefix, const char* w,
                      const Tensor<Scalar>& x) {
  Tensor<Scalar> out = x * m.parameter(prefix + ".w" + w).value;
  out.rowwise() += m.parameter(prefix + ".b" + w).value.row(0);
  return out;
}

template <typename Scalar>
Tensor<Scalar> norm(const Transformer<Scalar>& m, const std::string& prefix, const Tensor<Scalar>& x) {
  return k::layer_norm(x, m.parameter(prefix + ".g").value, m.parameter(prefix + ".b").value,
                       Scalar(1e-5));
}

}  // namespace

template <typename Scalar>
IncrementalDecoder<Scalar>::IncrementalDecoder(const Transformer<Scalar>& model,
                                               const std::vector<TokenId>& src)
    : model_(&model) {
  if (model.config().mode != Mode::AT) throw InvalidState("incremental decoding needs an AT model");
  const T enc = model.encode(src);
  for (int l = 0; l < model.config().layers; ++l) {
    const std::string p = "dec." + std::to_string(l) + ".cross";
    cross_keys_.push_back(affine(model, p, "k", enc));
    cross_values_.push_back(affine(model, p, "v", enc));
  }
  const Index h = model.config().hidden;
  cache_.assign(1, std::vector<LayerCache>(static_cast<std::size_t>(model.config().layers),
                                           LayerCache{T(0, h), T(0, h)}));
  steps_.assign(1, 0);
}

template <typename Scalar>
typename IncrementalDecoder<Scalar>::T IncrementalDecoder<Scalar>::step(
    const std::vector<std::size_t>& parents, const std::vector<TokenId>& tokens) {
  if (parents.size() != tokens.size() || parents.empty()) {
    throw InvalidArgument("IncrementalDecoder::step: parents/tokens size mismatch");
  }
  const auto& cfg = model_->config();
  const Index h = cfg.hidden;
  const Index n = static_cast<Index>(parents.size());
  const T& embed = model_->parameter("embed").value;
  const Scalar emb_scale = static_cast<Scalar>(std::sqrt(static_cast<double>(h)));

  T x(n, h);
  std::vector<Index> steps(parents.size());
  for (Index i = 0; i < n; ++i) {
    const auto parent = parents[static_cast<std::size_t>(i)];
    const TokenId tok = tokens[static_cast<std::size_t>(i)];
    if (parent >= steps_.size()) throw InvalidArgument("IncrementalDecoder::step: bad parent");
    if (tok < 0 || tok >= cfg.vocab) throw InvalidArgument("IncrementalDecoder::step: bad token");
    steps[static_cast<std::size_t>(i)] = steps_[parent];
    x.row(i) = embed.row(tok) * emb_scale +
               k::sinusoidal_positions<Scalar>(1, h, steps_[parent]).row(0);
  }

  std::vector<std::vector<LayerCache>> cache(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) cache[i] = cache_[parents[i]];

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "dec." + std::to_string(l);
    const auto li = static_cast<std::size_t>(l);
    T hdn = norm(*model_, p + ".ln1", x);
    const T q = affine(*model_, p + ".self", "q", hdn);
    const T kn = affine(*model_, p + ".self", "k", hdn);
    const T vn = affine(*model_, p + ".self", "v", hdn);
    T att(n, h);
    for (Index i = 0; i < n; ++i) {
      auto& c = cache[static_cast<std::size_t>(i)][li];
      c.keys.conservativeResize(c.keys.rows() + 1, h);
      c.keys.row(c.keys.rows() - 1) = kn.row(i);
      c.values.conservativeResize(c.values.rows() + 1, h);
      c.values.row(c.values.rows() - 1) = vn.row(i);
      const numerics::AttentionLayout layout{{{0, 1}}, {{0, c.keys.rows()}}, false};
      att.row(i) = k::attention(T(q.row(i)), c.keys, c.values, layout, cfg.heads).row(0);
    }
    x += affine(*model_, p + ".self", "o", att);

    hdn = norm(*model_, p + ".ln2", x);
    const T cq = affine(*model_, p + ".cross", "q", hdn);
    const Index s = cross_keys_[li].rows();
    std::vector<numerics::Segment> qs;
    std::vector<numerics::Segment> ks;
    for (Index i = 0; i < n; ++i) {
      qs.push_back({i, 1});
      ks.push_back({0, s});
    }
    const T cross = k::attention(cq, cross_keys_[li], cross_values_[li],
                                 numerics::AttentionLayout{qs, ks, false}, cfg.heads);
    x += affine(*model_, p + ".cross", "o", cross);

    hdn = norm(*model_, p + ".ln3", x);
    T f = affine(*model_, p + ".ffn", "1", hdn).cwiseMax(Scalar(0));
    x += affine(*model_, p + ".ffn", "2", f);
  }
  x = norm(*model_, "dec.ln", x);
  const T logits = x * embed.transpose();

  cache_ = std::move(cache);
  for (auto& s : steps) ++s;
  steps_ = std::move(steps);
  return k::log_softmax_rows(logits);
}

template class IncrementalDecoder<float>;
template class IncrementalDecoder<double>;

}  // namespace vega::model

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vega/numerics/tensor.hpp"

namespace vega::numerics {

/// Contiguous block of rows belonging to one sequence in a packed batch.
struct Segment {
  Index offset = 0;
  Index length = 0;
};

/// Which query rows attend to which key rows. queries[b] attends keys[b].
struct AttentionLayout {
  std::vector<Segment> queries;
  std::vector<Segment> keys;
  bool causal = false;
};

/// Packs consecutive sequences of the given lengths.
inline std::vector<Segment> pack_segments(const std::vector<Index>& lengths) {
  std::vector<Segment> out;
  out.reserve(lengths.size());
  Index offset = 0;
  for (Index len : lengths) {
    out.push_back({offset, len});
    offset += len;
  }
  return out;
}

namespace kernels {

template <typename Scalar>
void softmax_rows_inplace(Tensor<Scalar>& x) {
  for (Index r = 0; r < x.rows(); ++r) {
    auto row = x.row(r);
    const Scalar mx = row.maxCoeff();
    if (mx == -std::numeric_limits<Scalar>::infinity()) {
      row.setConstant(Scalar(1) / Scalar(x.cols()));
      continue;
    }
    row = (row.array() - mx).exp();
    row /= row.sum();
  }
}

template <typename Scalar>
Tensor<Scalar> log_softmax_rows(const Tensor<Scalar>& x) {
  Tensor<Scalar> out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar mx = x.row(r).maxCoeff();
    const Scalar lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    out.row(r) = x.row(r).array() - lse;
  }
  return out;
}

/// Row-wise layer normalisation; optionally returns the normalised input and
/// per-row inverse standard deviations for the backward pass.
template <typename Scalar>
Tensor<Scalar> layer_norm(const Tensor<Scalar>& x, const Tensor<Scalar>& gamma,
                          const Tensor<Scalar>& beta, Scalar eps,
                          Tensor<Scalar>* normalised = nullptr,
                          std::vector<Scalar>* inv_std = nullptr) {
  const Index n = x.cols();
  Tensor<Scalar> xhat(x.rows(), n);
  if (inv_std) inv_std->resize(static_cast<std::size_t>(x.rows()));
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).mean();
    const auto centred = (x.row(r).array() - mean).eval();
    const Scalar var = centred.square().sum() / Scalar(n);
    const Scalar rstd = Scalar(1) / std::sqrt(var + eps);
    xhat.row(r) = centred * rstd;
    if (inv_std) (*inv_std)[static_cast<std::size_t>(r)] = rstd;
  }
  Tensor<Scalar> y = (xhat.array().rowwise() * gamma.row(0).array()).rowwise() +
                     beta.row(0).array();
  if (normalised) *normalised = std::move(xhat);
  return y;
}

/// Multi-head scaled dot-product attention over a packed batch. When `probs`
/// is non-null it receives the attention matrix of every (segment, head) pair,
/// segment-major.
template <typename Scalar>
Tensor<Scalar> attention(const Tensor<Scalar>& q, const Tensor<Scalar>& k,
                         const Tensor<Scalar>& v, const AttentionLayout& layout,
                         Index heads, std::vector<Tensor<Scalar>>* probs = nullptr) {
  const Index width = q.cols();
  const Index dh = width / heads;
  const Scalar scale = Scalar(1) / std::sqrt(Scalar(dh));
  Tensor<Scalar> out = Tensor<Scalar>::Zero(q.rows(), width);
  if (probs) probs->clear();
  for (std::size_t b = 0; b < layout.queries.size(); ++b) {
    const Segment qs = layout.queries[b];
    const Segment ks = layout.keys[b];
    for (Index h = 0; h < heads; ++h) {
      Tensor<Scalar> scores =
          (q.block(qs.offset, h * dh, qs.length, dh) *
           k.block(ks.offset, h * dh, ks.length, dh).transpose()) *
          scale;
      if (layout.causal) {
        // Query i sits at the same position as key i.
        for (Index i = 0; i < qs.length; ++i) {
          for (Index j = i + 1; j < ks.length; ++j) {
            scores(i, j) = -std::numeric_limits<Scalar>::infinity();
          }
        }
      }
      softmax_rows_inplace(scores);
      out.block(qs.offset, h * dh, qs.length, dh).noalias() =
          scores * v.block(ks.offset, h * dh, ks.length, dh);
      if (probs) probs->push_back(std::move(scores));
    }
  }
  return out;
}

/// Fixed sinusoidal position encodings for positions [start, start + count).
template <typename Scalar>
Tensor<Scalar> sinusoidal_positions(Index count, Index width, Index start = 0) {
  Tensor<Scalar> pe(count, width);
  for (Index p = 0; p < count; ++p) {
    for (Index i = 0; i < width; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / static_cast<double>(width));
      const double angle = static_cast<double>(p + start) * freq;
      pe(p, i) = static_cast<Scalar>(std::sin(angle));
      if (i + 1 < width) pe(p, i + 1) = static_cast<Scalar>(std::cos(angle));
    }
  }
  return pe;
}

}  // namespace kernels
}  // namespace vega::numerics

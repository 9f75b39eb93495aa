#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vega/core/random.hpp"
#include "vega/numerics/kernels.hpp"
#include "vega/numerics/tape.hpp"

// Differentiable free functions over a Tape. Each op computes its value
// eagerly and registers the matching backward rule.

namespace vega::numerics {

namespace detail {

template <typename Scalar>
bool any_grad(const Tape<Scalar>& tape, std::initializer_list<Var> vars) {
  for (Var v : vars) {
    if (tape.requires_grad(v)) return true;
  }
  return false;
}

}  // namespace detail

template <typename Scalar>
Var matmul(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  if (av.cols() != bv.rows()) {
    throw InvalidArgument("matmul: shape mismatch " + shape_string(shape_of(av)) + " vs " +
                          shape_string(shape_of(bv)));
  }
  Tensor<Scalar> out = av * bv;
  return tape.push(std::move(out), detail::any_grad(tape, {a, b}),
                   [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
                     if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
                   });
}

/// a * b^T, used for the tied output projection.
template <typename Scalar>
Var matmul_nt(Tape<Scalar>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  if (av.cols() != bv.cols()) {
    throw InvalidArgument("matmul_nt: shape mismatch " + shape_string(shape_of(av)) + " vs " +
                          shape_string(shape_of(bv)));
  }
  Tensor<Scalar> out = av * bv.transpose();
  return tape.push(std::move(out), detail::any_grad(tape, {a, b}),
                   [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     if (t.requires_grad(a)) t.accumulate(a, g * t.value(b));
                     if (t.requires_grad(b)) t.accumulate(b, g.transpose() * t.value(a));
                   });
}

template <typename Scalar>
Var add(Tape<Scalar>& tape, Var a, Var b) {
  require_same_shape(shape_of(tape.value(a)), shape_of(tape.value(b)), "add");
  Tensor<Scalar> out = tape.value(a) + tape.value(b);
  return tape.push(std::move(out), detail::any_grad(tape, {a, b}),
                   [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     t.accumulate(a, g);
                     t.accumulate(b, g);
                   });
}

/// Adds a 1xN row to every row of a.
template <typename Scalar>
Var add_row(Tape<Scalar>& tape, Var a, Var row) {
  const auto& av = tape.value(a);
  const auto& rv = tape.value(row);
  if (rv.rows() != 1 || rv.cols() != av.cols()) {
    throw InvalidArgument("add_row: shape mismatch " + shape_string(shape_of(av)) + " vs " +
                          shape_string(shape_of(rv)));
  }
  Tensor<Scalar> out = av.rowwise() + rv.row(0);
  return tape.push(std::move(out), detail::any_grad(tape, {a, row}),
                   [a, row](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     t.accumulate(a, g);
                     if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
                   });
}

template <typename Scalar>
Var mul(Tape<Scalar>& tape, Var a, Var b) {
  require_same_shape(shape_of(tape.value(a)), shape_of(tape.value(b)), "mul");
  Tensor<Scalar> out = tape.value(a).cwiseProduct(tape.value(b));
  return tape.push(std::move(out), detail::any_grad(tape, {a, b}),
                   [a, b](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
                     if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
                   });
}

template <typename Scalar>
Var scale(Tape<Scalar>& tape, Var a, Scalar s) {
  Tensor<Scalar> out = tape.value(a) * s;
  return tape.push(std::move(out), tape.requires_grad(a),
                   [a, s](Tape<Scalar>& t, const Tensor<Scalar>& g) { t.accumulate(a, g * s); });
}

template <typename Scalar>
Var relu(Tape<Scalar>& tape, Var a) {
  Tensor<Scalar> out = tape.value(a).cwiseMax(Scalar(0));
  return tape.push(std::move(out), tape.requires_grad(a),
                   [a](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     t.accumulate(a, (t.value(a).array() > Scalar(0)).select(g.array(), Scalar(0)).matrix());
                   });
}

/// Row-wise softmax.
template <typename Scalar>
Var softmax(Tape<Scalar>& tape, Var a) {
  Tensor<Scalar> out = tape.value(a);
  kernels::softmax_rows_inplace(out);
  const std::size_t self = tape.size();
  return tape.push(std::move(out), tape.requires_grad(a),
                   [a, self](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     const auto& y = t.value(Var{self});
                     const auto dot = g.cwiseProduct(y).rowwise().sum().eval();
                     t.accumulate(a, y.cwiseProduct((g.colwise() - dot.col(0)).eval()));
                   });
}

template <typename Scalar>
Var sum(Tape<Scalar>& tape, Var a) {
  Tensor<Scalar> out(1, 1);
  out(0, 0) = tape.value(a).sum();
  return tape.push(std::move(out), tape.requires_grad(a),
                   [a](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     const auto& av = t.value(a);
                     t.accumulate(a, Tensor<Scalar>::Constant(av.rows(), av.cols(), g(0, 0)));
                   });
}

template <typename Scalar>
Var layer_norm(Tape<Scalar>& tape, Var x, Var gamma, Var beta, Scalar eps = Scalar(1e-5)) {
  const auto& xv = tape.value(x);
  const auto& gv = tape.value(gamma);
  const auto& bv = tape.value(beta);
  if (gv.rows() != 1 || gv.cols() != xv.cols() || bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw InvalidArgument("layer_norm: shape mismatch " + shape_string(shape_of(xv)) + " vs " +
                          shape_string(shape_of(gv)));
  }
  auto xhat = std::make_shared<Tensor<Scalar>>();
  auto inv_std = std::make_shared<std::vector<Scalar>>();
  Tensor<Scalar> out = kernels::layer_norm(xv, gv, bv, eps, xhat.get(), inv_std.get());
  return tape.push(
      std::move(out), detail::any_grad(tape, {x, gamma, beta}),
      [x, gamma, beta, xhat, inv_std](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        if (t.requires_grad(beta)) t.accumulate(beta, g.colwise().sum());
        if (t.requires_grad(gamma)) t.accumulate(gamma, g.cwiseProduct(*xhat).colwise().sum());
        if (!t.requires_grad(x)) return;
        const auto& gam = t.value(gamma);
        const Index n = g.cols();
        Tensor<Scalar> dx(g.rows(), n);
        for (Index r = 0; r < g.rows(); ++r) {
          const auto dxhat = (g.row(r).array() * gam.row(0).array()).eval();
          const Scalar mean_d = dxhat.sum() / Scalar(n);
          const Scalar mean_dx = (dxhat * xhat->row(r).array()).sum() / Scalar(n);
          dx.row(r) = (dxhat - mean_d - xhat->row(r).array() * mean_dx) *
                      (*inv_std)[static_cast<std::size_t>(r)];
        }
        t.accumulate(x, dx);
      });
}

/// Gathers rows of `table` by id.
template <typename Scalar>
Var embedding_lookup(Tape<Scalar>& tape, Var table, const std::vector<std::int32_t>& ids) {
  const auto& tv = tape.value(table);
  Tensor<Scalar> out(static_cast<Index>(ids.size()), tv.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tv.rows()) {
      throw InvalidArgument("embedding_lookup: id " + std::to_string(ids[i]) +
                            " outside table " + shape_string(shape_of(tv)));
    }
    out.row(static_cast<Index>(i)) = tv.row(ids[i]);
  }
  return tape.push(std::move(out), tape.requires_grad(table),
                   [table, ids](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     auto& tg = t.grad_buffer(table);
                     for (std::size_t i = 0; i < ids.size(); ++i) {
                       tg.row(ids[i]) += g.row(static_cast<Index>(i));
                     }
                   });
}

/// Mean token cross-entropy of row-wise logits against gold ids with label
/// smoothing: the target distribution is (1 - eps) on the gold id plus eps/V
/// spread over the whole vocabulary. eps = 0 gives plain cross-entropy.
/// The loss is accumulated in double; `total_nll`, if given, receives the
/// summed (unsmoothed) negative log-likelihood.
template <typename Scalar>
Var cross_entropy(Tape<Scalar>& tape, Var logits, const std::vector<std::int32_t>& targets,
                  double eps = 0.0, double* total_nll = nullptr) {
  const auto& lv = tape.value(logits);
  if (static_cast<Index>(targets.size()) != lv.rows() || lv.rows() == 0) {
    throw InvalidArgument("cross_entropy: " + std::to_string(targets.size()) +
                          " targets for logits " + shape_string(shape_of(lv)));
  }
  const Index vocab = lv.cols();
  auto probs = std::make_shared<Tensor<Scalar>>(lv);
  kernels::softmax_rows_inplace(*probs);
  double loss = 0.0;
  double nll = 0.0;
  for (Index r = 0; r < lv.rows(); ++r) {
    const std::int32_t gold = targets[static_cast<std::size_t>(r)];
    if (gold < 0 || gold >= vocab) throw InvalidArgument("cross_entropy: target out of range");
    double mx = lv(r, 0);
    for (Index c = 1; c < vocab; ++c) mx = std::max(mx, static_cast<double>(lv(r, c)));
    double z = 0.0;
    double logit_sum = 0.0;
    for (Index c = 0; c < vocab; ++c) {
      z += std::exp(static_cast<double>(lv(r, c)) - mx);
      logit_sum += static_cast<double>(lv(r, c));
    }
    const double lse = mx + std::log(z);
    const double gold_nll = lse - static_cast<double>(lv(r, gold));
    const double uniform_nll = lse - logit_sum / static_cast<double>(vocab);
    loss += (1.0 - eps) * gold_nll + eps * uniform_nll;
    nll += gold_nll;
  }
  if (total_nll) *total_nll = nll;
  const double rows = static_cast<double>(lv.rows());
  Tensor<Scalar> out(1, 1);
  out(0, 0) = static_cast<Scalar>(loss / rows);
  return tape.push(std::move(out), tape.requires_grad(logits),
                   [logits, targets, probs, eps, rows](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     Tensor<Scalar> d = *probs;
                     const Scalar spread = static_cast<Scalar>(eps / static_cast<double>(d.cols()));
                     d.array() -= spread;
                     for (std::size_t r = 0; r < targets.size(); ++r) {
                       d(static_cast<Index>(r), targets[r]) -= static_cast<Scalar>(1.0 - eps);
                     }
                     t.accumulate(logits, d * static_cast<Scalar>(g(0, 0) / rows));
                   });
}

/// Inverted dropout; identity when rate == 0.
template <typename Scalar>
Var dropout(Tape<Scalar>& tape, Var a, double rate, Rng& rng) {
  if (rate <= 0.0) return a;
  const auto& av = tape.value(a);
  auto mask = std::make_shared<Tensor<Scalar>>(av.rows(), av.cols());
  const Scalar keep = static_cast<Scalar>(1.0 / (1.0 - rate));
  for (Index i = 0; i < mask->size(); ++i) {
    mask->data()[i] = rng.uniform() < rate ? Scalar(0) : keep;
  }
  Tensor<Scalar> out = av.cwiseProduct(*mask);
  return tape.push(std::move(out), tape.requires_grad(a),
                   [a, mask](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     t.accumulate(a, g.cwiseProduct(*mask));
                   });
}

/// Mean of each segment's rows; output has one row per segment.
template <typename Scalar>
Var segment_mean(Tape<Scalar>& tape, Var a, const std::vector<Segment>& segments) {
  const auto& av = tape.value(a);
  Tensor<Scalar> out(static_cast<Index>(segments.size()), av.cols());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [off, len] = segments[s];
    if (len <= 0 || off + len > av.rows()) throw InvalidArgument("segment_mean: bad segment");
    out.row(static_cast<Index>(s)) = av.middleRows(off, len).colwise().mean();
  }
  return tape.push(std::move(out), tape.requires_grad(a),
                   [a, segments](Tape<Scalar>& t, const Tensor<Scalar>& g) {
                     auto& ag = t.grad_buffer(a);
                     for (std::size_t s = 0; s < segments.size(); ++s) {
                       const auto [off, len] = segments[s];
                       ag.middleRows(off, len).rowwise() +=
                           g.row(static_cast<Index>(s)) / static_cast<Scalar>(len);
                     }
                   });
}

/// Multi-head scaled dot-product attention; q/k/v are already projected.
template <typename Scalar>
Var attention(Tape<Scalar>& tape, Var q, Var k, Var v, const AttentionLayout& layout,
              Index heads) {
  const auto& qv = tape.value(q);
  const auto& kv = tape.value(k);
  const auto& vv = tape.value(v);
  if (qv.cols() != kv.cols() || kv.cols() != vv.cols() || kv.rows() != vv.rows()) {
    throw InvalidArgument("attention: shape mismatch " + shape_string(shape_of(qv)) + " / " +
                          shape_string(shape_of(kv)) + " / " + shape_string(shape_of(vv)));
  }
  if (heads <= 0 || qv.cols() % heads != 0) {
    throw InvalidArgument("attention: width " + std::to_string(qv.cols()) +
                          " not divisible by heads " + std::to_string(heads));
  }
  if (layout.queries.size() != layout.keys.size()) {
    throw InvalidArgument("attention: query/key segment count mismatch");
  }
  auto probs = std::make_shared<std::vector<Tensor<Scalar>>>();
  Tensor<Scalar> out = kernels::attention(qv, kv, vv, layout, heads,
                                          detail::any_grad(tape, {q, k, v}) ? probs.get() : nullptr);
  return tape.push(
      std::move(out), detail::any_grad(tape, {q, k, v}),
      [q, k, v, layout, heads, probs](Tape<Scalar>& t, const Tensor<Scalar>& g) {
        const auto& qv = t.value(q);
        const auto& kv = t.value(k);
        const auto& vv = t.value(v);
        const Index dh = qv.cols() / heads;
        const Scalar sc = Scalar(1) / std::sqrt(Scalar(dh));
        Tensor<Scalar> dq = Tensor<Scalar>::Zero(qv.rows(), qv.cols());
        Tensor<Scalar> dk = Tensor<Scalar>::Zero(kv.rows(), kv.cols());
        Tensor<Scalar> dv = Tensor<Scalar>::Zero(vv.rows(), vv.cols());
        std::size_t idx = 0;
        for (std::size_t b = 0; b < layout.queries.size(); ++b) {
          const Segment qs = layout.queries[b];
          const Segment ks = layout.keys[b];
          for (Index h = 0; h < heads; ++h, ++idx) {
            const Tensor<Scalar>& p = (*probs)[idx];
            const auto go = g.block(qs.offset, h * dh, qs.length, dh);
            dv.block(ks.offset, h * dh, ks.length, dh).noalias() += p.transpose() * go;
            Tensor<Scalar> dp = go * vv.block(ks.offset, h * dh, ks.length, dh).transpose();
            const auto rowdot = dp.cwiseProduct(p).rowwise().sum().eval();
            Tensor<Scalar> ds = p.cwiseProduct((dp.colwise() - rowdot.col(0)).eval()) * sc;
            dq.block(qs.offset, h * dh, qs.length, dh).noalias() +=
                ds * kv.block(ks.offset, h * dh, ks.length, dh);
            dk.block(ks.offset, h * dh, ks.length, dh).noalias() +=
                ds.transpose() * qv.block(qs.offset, h * dh, qs.length, dh);
          }
        }
        if (t.requires_grad(q)) t.accumulate(q, dq);
        if (t.requires_grad(k)) t.accumulate(k, dk);
        if (t.requires_grad(v)) t.accumulate(v, dv);
      });
}

}  // namespace vega::numerics

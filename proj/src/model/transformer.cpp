#include "vega/model/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "vega/core/error.hpp"
#include "vega/numerics/kernels.hpp"
#include "vega/numerics/ops.hpp"

namespace vega::model {

namespace ops = numerics;
using numerics::AttentionLayout;
using numerics::pack_segments;
using numerics::Segment;

int LengthDistribution::argmax() const {
  if (probs.empty()) throw InvalidState("empty length distribution");
  const auto it = std::max_element(probs.begin(), probs.end());
  return min_length + static_cast<int>(it - probs.begin());
}

double LengthDistribution::prob(int length) const {
  if (length < min_length || length > max_length()) return 0.0;
  return probs[static_cast<std::size_t>(length - min_length)];
}

template <typename Scalar>
LengthDistribution length_distribution(const Tensor<Scalar>& logits, int src_len, int offsets) {
  if (logits.rows() != 1 || logits.cols() != 2 * offsets + 1) {
    throw InvalidArgument("length_distribution: expected [1x" + std::to_string(2 * offsets + 1) +
                          "] logits, got " + numerics::shape_string(numerics::shape_of(logits)));
  }
  LengthDistribution out;
  out.min_length = std::max(1, src_len - offsets);
  const int first = out.min_length - src_len + offsets;
  double mx = -std::numeric_limits<double>::infinity();
  for (int c = first; c <= 2 * offsets; ++c) mx = std::max(mx, static_cast<double>(logits(0, c)));
  double z = 0.0;
  for (int c = first; c <= 2 * offsets; ++c) {
    out.probs.push_back(std::exp(static_cast<double>(logits(0, c)) - mx));
    z += out.probs.back();
  }
  for (double& p : out.probs) p /= z;
  return out;
}

template <typename Scalar>
struct Transformer<Scalar>::Graph {
  Tape<Scalar>& tape;
  std::vector<Parameter<Scalar>>& params;
  const std::unordered_map<std::string, std::size_t>& index;
  Rng* rng = nullptr;
  double dropout = 0.0;
  std::vector<std::optional<Var>> vars = std::vector<std::optional<Var>>(params.size());

  Var p(const std::string& name) {
    const std::size_t i = index.at(name);
    if (!vars[i]) vars[i] = tape.parameter(params[i]);
    return *vars[i];
  }
  Var drop(Var x) { return rng ? ops::dropout(tape, x, dropout, *rng) : x; }
};

template <typename Scalar>
Transformer<Scalar>::Transformer(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  const Index h = config_.hidden;
  const Index f = config_.ffn;
  add_parameter("embed", config_.vocab, h);
  auto attention = [&](const std::string& p) {
    for (const char* w : {"q", "k", "v", "o"}) {
      add_parameter(p + ".w" + w, h, h);
      add_parameter(p + ".b" + w, 1, h);
    }
  };
  auto layer_norm = [&](const std::string& p) {
    add_parameter(p + ".g", 1, h);
    add_parameter(p + ".b", 1, h);
  };
  auto ffn = [&](const std::string& p) {
    add_parameter(p + ".w1", h, f);
    add_parameter(p + ".b1", 1, f);
    add_parameter(p + ".w2", f, h);
    add_parameter(p + ".b2", 1, h);
  };
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    layer_norm(p + ".ln1");
    attention(p + ".self");
    layer_norm(p + ".ln2");
    ffn(p + ".ffn");
  }
  layer_norm("enc.ln");
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "dec." + std::to_string(l);
    layer_norm(p + ".ln1");
    attention(p + ".self");
    layer_norm(p + ".ln2");
    attention(p + ".cross");
    layer_norm(p + ".ln3");
    ffn(p + ".ffn");
  }
  layer_norm("dec.ln");
  if (config_.mode == Mode::NAT) {
    add_parameter("length.w", h, config_.length_classes());
    add_parameter("length.b", 1, config_.length_classes());
  }

  Rng rng(seed);
  for (auto& p : params_) {
    const auto& n = p.name;
    const bool is_bias = n.size() > 2 && n[n.rfind('.') + 1] == 'b';
    if (n == "embed") {
      const double sd = 1.0 / std::sqrt(static_cast<double>(h));
      for (Index i = 0; i < p.value.size(); ++i) p.value.data()[i] = static_cast<Scalar>(rng.normal(0, sd));
    } else if (n.ends_with(".g")) {
      p.value.setOnes();
    } else if (is_bias) {
      p.value.setZero();
    } else {
      const double limit = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
      for (Index i = 0; i < p.value.size(); ++i) {
        p.value.data()[i] = static_cast<Scalar>((2.0 * rng.uniform() - 1.0) * limit);
      }
    }
  }
}

template <typename Scalar>
void Transformer<Scalar>::add_parameter(const std::string& name, Index rows, Index cols) {
  index_.emplace(name, params_.size());
  params_.push_back({name, T::Zero(rows, cols), {}});
}

template <typename Scalar>
Parameter<Scalar>& Transformer<Scalar>::parameter(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw NotFound("no parameter named '" + name + "'");
  return params_[it->second];
}

template <typename Scalar>
const Parameter<Scalar>& Transformer<Scalar>::parameter(const std::string& name) const {
  return const_cast<Transformer*>(this)->parameter(name);
}

template <typename Scalar>
void Transformer<Scalar>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template <typename Scalar>
void Transformer<Scalar>::set_dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) throw InvalidArgument("dropout must be in [0, 1)");
  config_.dropout = rate;
}

template <typename Scalar>
Var Transformer<Scalar>::norm(Graph& g, const std::string& prefix, Var x) const {
  return ops::layer_norm(g.tape, x, g.p(prefix + ".g"), g.p(prefix + ".b"));
}

template <typename Scalar>
Var Transformer<Scalar>::block_attention(Graph& g, const std::string& prefix, Var xq, Var xkv,
                                         const AttentionLayout& layout) const {
  auto& t = g.tape;
  auto project = [&](Var x, const char* w) {
    return ops::add_row(t, ops::matmul(t, x, g.p(prefix + ".w" + w)), g.p(prefix + ".b" + w));
  };
  Var q = project(xq, "q");
  Var k = project(xkv, "k");
  Var v = project(xkv, "v");
  Var o = ops::attention(t, q, k, v, layout, config_.heads);
  return project(o, "o");
}

template <typename Scalar>
Var Transformer<Scalar>::feed_forward(Graph& g, const std::string& prefix, Var x) const {
  auto& t = g.tape;
  Var hdn = ops::relu(t, ops::add_row(t, ops::matmul(t, x, g.p(prefix + ".w1")), g.p(prefix + ".b1")));
  return ops::add_row(t, ops::matmul(t, hdn, g.p(prefix + ".w2")), g.p(prefix + ".b2"));
}

namespace {

template <typename Scalar>
Tensor<Scalar> stacked_positions(const std::vector<Index>& lengths, Index width) {
  Index total = 0;
  for (Index l : lengths) total += l;
  Tensor<Scalar> pe(total, width);
  Index row = 0;
  for (Index l : lengths) {
    pe.middleRows(row, l) = numerics::kernels::sinusoidal_positions<Scalar>(l, width);
    row += l;
  }
  return pe;
}

std::vector<Index> lengths_of(const std::vector<std::vector<TokenId>>& seqs) {
  std::vector<Index> out;
  for (const auto& s : seqs) {
    if (s.empty()) throw InvalidArgument("empty sequence");
    out.push_back(static_cast<Index>(s.size()));
  }
  return out;
}

}  // namespace

template <typename Scalar>
Var Transformer<Scalar>::embed_tokens(Graph& g, const std::vector<std::vector<TokenId>>& seqs) const {
  auto& t = g.tape;
  std::vector<TokenId> ids;
  for (const auto& s : seqs) ids.insert(ids.end(), s.begin(), s.end());
  Var e = ops::scale(t, ops::embedding_lookup(t, g.p("embed"), ids),
                     static_cast<Scalar>(std::sqrt(static_cast<double>(config_.hidden))));
  Var pos = t.constant(stacked_positions<Scalar>(lengths_of(seqs), config_.hidden));
  return g.drop(ops::add(t, e, pos));
}

template <typename Scalar>
Var Transformer<Scalar>::encoder(Graph& g, const std::vector<std::vector<TokenId>>& srcs) const {
  auto& t = g.tape;
  Var x = embed_tokens(g, srcs);
  const auto segs = pack_segments(lengths_of(srcs));
  const AttentionLayout self{segs, segs, false};
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "enc." + std::to_string(l);
    Var h = norm(g, p + ".ln1", x);
    x = ops::add(t, x, g.drop(block_attention(g, p + ".self", h, h, self)));
    h = norm(g, p + ".ln2", x);
    x = ops::add(t, x, g.drop(feed_forward(g, p + ".ffn", h)));
  }
  return norm(g, "enc.ln", x);
}

template <typename Scalar>
Var Transformer<Scalar>::decoder(Graph& g, Var enc, const std::vector<Index>& src_lengths, Var x,
                                 const std::vector<Index>& tgt_lengths, bool causal) const {
  auto& t = g.tape;
  const auto tgt_segs = pack_segments(tgt_lengths);
  const auto src_segs = pack_segments(src_lengths);
  const AttentionLayout self{tgt_segs, tgt_segs, causal};
  const AttentionLayout cross{tgt_segs, src_segs, false};
  for (int l = 0; l < config_.layers; ++l) {
    const std::string p = "dec." + std::to_string(l);
    Var h = norm(g, p + ".ln1", x);
    x = ops::add(t, x, g.drop(block_attention(g, p + ".self", h, h, self)));
    h = norm(g, p + ".ln2", x);
    x = ops::add(t, x, g.drop(block_attention(g, p + ".cross", h, enc, cross)));
    h = norm(g, p + ".ln3", x);
    x = ops::add(t, x, g.drop(feed_forward(g, p + ".ffn", h)));
  }
  x = norm(g, "dec.ln", x);
  return ops::matmul_nt(t, x, g.p("embed"));
}

template <typename Scalar>
Var Transformer<Scalar>::length_logits(Graph& g, Var enc, const std::vector<Index>& src_lengths) const {
  auto& t = g.tape;
  Var pooled = ops::segment_mean(t, enc, pack_segments(src_lengths));
  return ops::add_row(t, ops::matmul(t, pooled, g.p("length.w")), g.p("length.b"));
}

template <typename Scalar>
typename Transformer<Scalar>::T Transformer<Scalar>::encode(const std::vector<TokenId>& src) const {
  Tape<Scalar> tape(false);
  Graph g{tape, const_cast<std::vector<Parameter<Scalar>>&>(params_), index_};
  return tape.value(encoder(g, {src}));
}

template <typename Scalar>
typename Transformer<Scalar>::T Transformer<Scalar>::forward_at(
    const std::vector<TokenId>& src, const std::vector<TokenId>& tgt_prefix) const {
  if (config_.mode != Mode::AT) throw InvalidState("forward_at on a NAT model");
  if (tgt_prefix.empty()) throw InvalidArgument("forward_at: empty target prefix");
  Tape<Scalar> tape(false);
  Graph g{tape, const_cast<std::vector<Parameter<Scalar>>&>(params_), index_};
  Var enc = encoder(g, {src});
  Var x = embed_tokens(g, {tgt_prefix});
  T probs = tape.value(decoder(g, enc, {static_cast<Index>(src.size())}, x,
                               {static_cast<Index>(tgt_prefix.size())}, true));
  numerics::kernels::softmax_rows_inplace(probs);
  return probs;
}

template <typename Scalar>
typename Transformer<Scalar>::T Transformer<Scalar>::forward_nat(const std::vector<TokenId>& src,
                                                                int tgt_len) const {
  if (config_.mode != Mode::NAT) throw InvalidState("forward_nat on an AT model");
  if (tgt_len < 1) throw InvalidArgument("forward_nat: tgt_len must be >= 1");
  Tape<Scalar> tape(false);
  Graph g{tape, const_cast<std::vector<Parameter<Scalar>>&>(params_), index_};
  Var enc = encoder(g, {src});
  Var x = tape.constant(numerics::kernels::sinusoidal_positions<Scalar>(tgt_len, config_.hidden));
  T probs = tape.value(
      decoder(g, enc, {static_cast<Index>(src.size())}, x, {static_cast<Index>(tgt_len)}, false));
  numerics::kernels::softmax_rows_inplace(probs);
  return probs;
}

template <typename Scalar>
LengthDistribution Transformer<Scalar>::predict_length(const std::vector<TokenId>& src) const {
  if (config_.mode != Mode::NAT) throw InvalidState("predict_length on an AT model");
  Tape<Scalar> tape(false);
  Graph g{tape, const_cast<std::vector<Parameter<Scalar>>&>(params_), index_};
  Var enc = encoder(g, {src});
  return length_distribution(tape.value(length_logits(g, enc, {static_cast<Index>(src.size())})),
                             static_cast<int>(src.size()), config_.length_offsets);
}

template <typename Scalar>
LossStats Transformer<Scalar>::loss(Tape<Scalar>& tape, const std::vector<Example>& batch,
                                    double label_smoothing, Rng* dropout_rng) {
  if (batch.empty()) throw InvalidArgument("loss: empty batch");
  Graph g{tape, params_, index_, dropout_rng, config_.dropout};
  std::vector<std::vector<TokenId>> srcs;
  std::vector<Index> src_lengths;
  std::vector<Index> tgt_lengths;
  std::vector<TokenId> targets;
  for (const auto& ex : batch) {
    srcs.push_back(ex.src);
    src_lengths.push_back(static_cast<Index>(ex.src.size()));
  }
  Var enc = encoder(g, srcs);
  LossStats stats;
  Var logits;
  if (config_.mode == Mode::AT) {
    std::vector<std::vector<TokenId>> inputs;
    for (const auto& ex : batch) {
      std::vector<TokenId> in{ex.start};
      in.insert(in.end(), ex.tgt.begin(), ex.tgt.end());
      inputs.push_back(std::move(in));
      targets.insert(targets.end(), ex.tgt.begin(), ex.tgt.end());
      targets.push_back(subword::kEos);
      tgt_lengths.push_back(static_cast<Index>(ex.tgt.size() + 1));
    }
    logits = decoder(g, enc, src_lengths, embed_tokens(g, inputs), tgt_lengths, true);
  } else {
    for (const auto& ex : batch) {
      if (ex.tgt.empty()) throw InvalidArgument("loss: NAT example with empty target");
      targets.insert(targets.end(), ex.tgt.begin(), ex.tgt.end());
      tgt_lengths.push_back(static_cast<Index>(ex.tgt.size()));
    }
    Var x = tape.constant(stacked_positions<Scalar>(tgt_lengths, config_.hidden));
    logits = decoder(g, enc, src_lengths, g.drop(x), tgt_lengths, false);
  }
  stats.tokens = targets.size();
  stats.loss = ops::cross_entropy(tape, logits, targets, label_smoothing, &stats.nll);
  if (config_.mode == Mode::NAT) {
    std::vector<TokenId> classes;
    const int k = config_.length_offsets;
    for (const auto& ex : batch) {
      const int delta = static_cast<int>(ex.tgt.size()) - static_cast<int>(ex.src.size());
      classes.push_back(std::clamp(delta, -k, k) + k);
    }
    Var len = ops::cross_entropy(tape, length_logits(g, enc, src_lengths), classes, 0.0,
                                 &stats.length_nll);
    stats.loss = ops::add(tape, stats.loss, ops::scale(tape, len, Scalar(0.1)));
  }
  return stats;
}

template class Transformer<float>;
template class Transformer<double>;
template LengthDistribution length_distribution(const Tensor<float>&, int, int);
template LengthDistribution length_distribution(const Tensor<double>&, int, int);

}  // namespace vega::model

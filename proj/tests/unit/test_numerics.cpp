#include <cmath>

#include "doctest.h"
#include "vega/numerics/gradcheck.hpp"
#include "vega/numerics/ops.hpp"

using namespace vega;
using namespace vega::numerics;

namespace {

using TD = Tensor<double>;

TD random_tensor(Index r, Index c, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  TD t(r, c);
  for (Index i = 0; i < t.size(); ++i) t.data()[i] = rng.normal(0.0, scale);
  return t;
}

double check(const LossBuilder<double>& f, const TD& at) {
  return finite_difference_check<double>(f, at, 1e-3);
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform") {
  Tape<float> tape;
  Tensor<float> z = Tensor<float>::Zero(1, 2);
  const auto& p = tape.value(softmax(tape, tape.constant(z)));
  CHECK(p(0, 0) == doctest::Approx(0.5));
  CHECK(p(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("softmax rows are normalised for random inputs") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Tape<float> tape;
    Tensor<float> x = random_tensor(7, 13, seed, 5.0).cast<float>();
    const auto& p = tape.value(softmax(tape, tape.constant(x)));
    for (Index r = 0; r < p.rows(); ++r) CHECK(std::abs(p.row(r).sum() - 1.0f) < 1e-6f);
  }
}

TEST_CASE("matmul matches hand product") {
  Tape<double> tape;
  TD a(2, 3);
  a << 1, 2, 3, 4, 5, 6;
  TD b(3, 2);
  b << 1, 0, 0, 1, 1, 1;
  const auto& c = tape.value(matmul(tape, tape.constant(a), tape.constant(b)));
  TD expected(2, 2);
  expected << 4, 5, 10, 11;
  CHECK(c == expected);
}

TEST_CASE("shape errors name both shapes") {
  Tape<double> tape;
  Var a = tape.constant(TD::Zero(2, 3));
  Var b = tape.constant(TD::Zero(2, 3));
  try {
    matmul(tape, a, b);
    FAIL("expected InvalidArgument");
  } catch (const InvalidArgument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
  }
  CHECK_THROWS_AS(add(tape, a, tape.constant(TD::Zero(3, 2))), InvalidArgument);
}

TEST_CASE("label smoothing with eps = 0 is plain cross-entropy") {
  TD logits = random_tensor(4, 6, 3);
  std::vector<std::int32_t> gold{0, 5, 2, 2};
  double plain = 0.0;
  for (Index r = 0; r < 4; ++r) {
    double z = 0.0;
    for (Index c = 0; c < 6; ++c) z += std::exp(logits(r, c));
    plain += std::log(z) - logits(r, gold[static_cast<std::size_t>(r)]);
  }
  plain /= 4.0;
  Tape<double> tape;
  const double loss = tape.value(cross_entropy(tape, tape.constant(logits), gold, 0.0))(0, 0);
  CHECK(loss == doctest::Approx(plain).epsilon(1e-12));

  Tape<double> smoothed;
  const double ls = smoothed.value(cross_entropy(smoothed, smoothed.constant(logits), gold, 0.1))(0, 0);
  CHECK(ls != doctest::Approx(plain));
}

TEST_CASE("backward of sum is all ones") {
  Parameter<double> x{"x", random_tensor(3, 4, 1), {}};
  Tape<double> tape;
  tape.backward(sum(tape, tape.parameter(x)));
  CHECK(x.grad == TD::Ones(3, 4));
}

TEST_CASE("backward of x*x at 3 is 6") {
  Parameter<double> x{"x", TD::Constant(1, 1, 3.0), {}};
  Tape<double> tape;
  Var v = tape.parameter(x);
  tape.backward(mul(tape, v, v));
  CHECK(x.grad(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape<double> tape;
  Var v = tape.variable(TD::Ones(2, 2));
  CHECK_THROWS_AS(tape.backward(v), InvalidArgument);
}

TEST_CASE("finite difference check") {
  SUBCASE("quadratic is exact") {
    TD at = random_tensor(3, 3, 11);
    const double err = check([](Tape<double>& t, Var x) { return sum(t, mul(t, x, x)); }, at);
    CHECK(err < 1e-8);
  }
  SUBCASE("rejects zero step") {
    CHECK_THROWS_AS(finite_difference_check<double>(
                        [](Tape<double>& t, Var x) { return sum(t, x); }, TD::Ones(1, 1), 0.0),
                    InvalidArgument);
  }
  SUBCASE("non-finite output is a numeric error") {
    CHECK_THROWS_AS(check(
                        [](Tape<double>& t, Var x) {
                          return sum(t, scale(t, x, std::numeric_limits<double>::infinity()));
                        },
                        TD::Ones(1, 1)),
                    NumericError);
  }
}

TEST_CASE("every differentiable op passes the finite-difference oracle") {
  const TD w = random_tensor(4, 5, 21, 0.5);
  const TD other = random_tensor(4, 5, 22, 0.5);
  const TD square = random_tensor(5, 3, 23, 0.5);
  const std::vector<std::int32_t> gold{1, 0, 4, 2};
  const double tol = 1e-4;

  CHECK(check([&](Tape<double>& t, Var x) {
          return cross_entropy(t, matmul(t, x, t.constant(square * square.transpose())), gold);
        }, w) < tol);
  CHECK(check([&](Tape<double>& t, Var x) {
          return cross_entropy(t, matmul_nt(t, x, t.constant(other)), {1, 0, 3, 2}, 0.1);
        }, w) < tol);
  CHECK(check([&](Tape<double>& t, Var x) {
          return sum(t, mul(t, add(t, x, t.constant(other)), t.constant(other)));
        }, w) < tol);
  CHECK(check([&](Tape<double>& t, Var x) {
          Var bias = t.constant(other.row(0));
          return sum(t, mul(t, relu(t, add_row(t, x, bias)), t.constant(other)));
        }, w) < tol);
  CHECK(check([&](Tape<double>& t, Var x) {
          return sum(t, mul(t, softmax(t, scale(t, x, 2.0)), t.constant(other)));
        }, w) < tol);
  CHECK(check([&](Tape<double>& t, Var x) {
          Var g = t.constant(other.row(1));
          Var b = t.constant(other.row(2));
          return sum(t, mul(t, layer_norm(t, x, g, b), t.constant(other)));
        }, w) < tol);
  // gamma and beta of layer_norm
  CHECK(check([&](Tape<double>& t, Var g) {
          Var b = t.constant(other.row(2));
          return sum(t, mul(t, layer_norm(t, t.constant(other), g, b), t.constant(w)));
        }, TD(w.row(0))) < tol);
  CHECK(check([&](Tape<double>& t, Var table) {
          Var e = embedding_lookup(t, table, {3, 1, 3, 0});
          return sum(t, mul(t, e, t.constant(other)));
        }, w) < tol);
  CHECK(check([&](Tape<double>& t, Var x) {
          Var m = segment_mean(t, x, {{0, 3}, {3, 1}});
          return sum(t, mul(t, m, t.constant(TD(other.topRows(2)))));
        }, w) < tol);
}

TEST_CASE("attention gradients for q, k and v, with and without causal mask") {
  const TD q = random_tensor(7, 8, 31);
  const TD k = random_tensor(9, 8, 32);
  const TD v = random_tensor(9, 8, 33);
  const TD weight = random_tensor(7, 8, 34);
  for (bool causal : {false, true}) {
    AttentionLayout layout;
    layout.causal = causal;
    if (causal) {
      layout.queries = {{0, 3}, {3, 4}};
      layout.keys = {{0, 3}, {3, 4}};
    } else {
      layout.queries = {{0, 3}, {3, 4}};
      layout.keys = {{0, 4}, {4, 5}};
    }
    const TD keys = causal ? TD(q) : k;
    const TD vals = causal ? TD(v.topRows(7)) : v;
    auto loss = [&](Tape<double>& t, Var qv, Var kv, Var vv) {
      return sum(t, mul(t, attention(t, qv, kv, vv, layout, 2), t.constant(weight)));
    };
    CHECK(check([&](Tape<double>& t, Var x) {
            return loss(t, x, t.constant(keys), t.constant(vals));
          }, q) < 1e-4);
    CHECK(check([&](Tape<double>& t, Var x) {
            return loss(t, t.constant(q), x, t.constant(vals));
          }, keys) < 1e-4);
    CHECK(check([&](Tape<double>& t, Var x) {
            return loss(t, t.constant(q), t.constant(keys), x);
          }, vals) < 1e-4);
  }
}

TEST_CASE("causal attention ignores later keys") {
  const TD q = random_tensor(4, 4, 41);
  TD k = random_tensor(4, 4, 42);
  TD v = random_tensor(4, 4, 43);
  AttentionLayout layout{{{0, 4}}, {{0, 4}}, true};
  const TD before = kernels::attention(q, k, v, layout, 2);
  k.row(3).setConstant(9.0);
  v.row(3).setConstant(-9.0);
  const TD after = kernels::attention(q, k, v, layout, 2);
  CHECK(before.topRows(3) == after.topRows(3));
  CHECK(before.row(3) != after.row(3));
}

TEST_CASE("dropout is identity at rate zero and deterministic per seed") {
  Tape<float> tape;
  Var x = tape.constant(Tensor<float>::Ones(3, 3));
  Rng rng(1);
  CHECK(dropout(tape, x, 0.0, rng).id == x.id);
  Rng r1(5), r2(5);
  const Tensor<float> a = tape.value(dropout(tape, x, 0.5, r1));
  const Tensor<float> b = tape.value(dropout(tape, x, 0.5, r2));
  CHECK(a == b);
}

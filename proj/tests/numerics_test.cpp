#include <cmath>
#include <limits>
#include <numeric>

#include <gtest/gtest.h>

#include "misc/numerics/checkpoint.hpp"
#include "misc/numerics/gradcheck.hpp"
#include "misc/numerics/init.hpp"
#include "misc/numerics/layers.hpp"
#include "misc/numerics/ops.hpp"
#include "misc/numerics/random.hpp"
#include "misc/numerics/tape.hpp"
#include "test_support.hpp"

namespace misc::numerics {
namespace {

using testing::expect_op_gradients;
using testing::random_tensor;
using Ins = std::vector<Var<double>>;

TEST(Tensor, ConstructionValidatesLength) {
  EXPECT_THROW(Tensor<double>({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW(Tensor<double>::matrix({{1, 2}, {3}}), DimensionError);
  const auto m = Tensor<double>::matrix({{1, 2, 3}, {4, 5, 6}});
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(Tensor<double>::vector({1, 2}).rows(), 1u);
}

TEST(Tensor, ItemRequiresSingleElement) {
  EXPECT_THROW(Tensor<double>({2}).item(), ContractError);
  EXPECT_EQ(Tensor<double>::scalar(3.5).item(), 3.5);
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng(42).next(), c.next());
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.below(7), 7u);
  }
}

TEST(Rng, NormalMomentsAreStandard) {
  Rng rng(9);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, ShuffleIsAPermutation) {
  Rng rng(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  auto w = v;
  rng.shuffle(w);
  EXPECT_NE(v, w);
  std::sort(w.begin(), w.end());
  EXPECT_EQ(v, w);
}

TEST(Ops, MatmulIdentityIsExact) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t r = 1 + rng.below(6), c = 1 + rng.below(6);
    Tape<double> tape(false);
    const auto a = random_tensor({r, c}, rng);
    Var<double> av = tape.constant(a);
    EXPECT_EQ(matmul(tape.constant(identity<double>(r)), av).value(), a);
    EXPECT_EQ(matmul(av, tape.constant(identity<double>(c))).value(), a);
  }
}

TEST(Ops, MatmulShapeMismatchThrows) {
  Tape<double> tape(false);
  EXPECT_THROW(matmul(tape.constant(Tensor<double>({2, 3})), tape.constant(Tensor<double>({2, 3}))), DimensionError);
}

TEST(Ops, MatmulHandExample) {
  Tape<double> tape(false);
  auto a = tape.constant(Tensor<double>::matrix({{1, 2}, {3, 4}}));
  auto b = tape.constant(Tensor<double>::matrix({{5, 6}, {7, 8}}));
  EXPECT_EQ(matmul(a, b).value(), Tensor<double>::matrix({{19, 22}, {43, 50}}));
  EXPECT_EQ(matmul_transposed(a, b).value(), Tensor<double>::matrix({{17, 23}, {39, 53}}));
}

TEST(Ops, SoftmaxRowsSumToOneAndSurviveLargeLogits) {
  Tape<double> tape(false);
  auto s = softmax_rows(tape.constant(Tensor<double>::matrix({{1000, 1000, 0}, {-5, 0, 5}})));
  const auto& v = s.value();
  EXPECT_NEAR(v(0, 0), 0.5, 1e-12);
  EXPECT_NEAR(v(0, 2), 0.0, 1e-12);
  for (std::size_t r = 0; r < 2; ++r) {
    double total = 0;
    for (double x : v.row(r)) total += x;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Ops, LayerNormNormalizesRows) {
  Tape<double> tape(false);
  auto x = tape.constant(Tensor<double>::matrix({{1, 2, 3, 4}, {10, 10, 10, 14}}));
  auto y = layer_norm(x, tape.constant(ones<double>({4})), tape.constant(Tensor<double>({4}))).value();
  for (std::size_t r = 0; r < 2; ++r) {
    double mean = 0, var = 0;
    for (double v : y.row(r)) mean += v / 4;
    for (double v : y.row(r)) var += (v - mean) * (v - mean) / 4;
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(var, 1.0, 1e-4);  // eps = 1e-5 shrinks it slightly
  }
  EXPECT_THROW(layer_norm(tape.constant(Tensor<double>({2, 1})), tape.constant(ones<double>({1})),
                          tape.constant(Tensor<double>({1}))),
               ContractError);
}

TEST(Ops, GeluMatchesErfForm) {
  Tape<double> tape(false);
  auto y = gelu(tape.constant(Tensor<double>::vector({-2, 0, 1.5}))).value();
  for (auto [x, i] : {std::pair{-2.0, 0}, {0.0, 1}, {1.5, 2}}) {
    EXPECT_NEAR(y[static_cast<std::size_t>(i)], 0.5 * x * (1 + std::erf(x / std::sqrt(2.0))), 1e-14);
  }
}

TEST(Ops, CrossEntropyHandFixture) {
  // Two positions, two classes: logits [0, ln 3] target 1, [ln 4, 0] target 1.
  Tape<double> tape(false);
  auto logits = tape.constant(Tensor<double>::matrix({{0, std::log(3.0)}, {std::log(4.0), 0}}));
  const double expected = (-std::log(0.75) - std::log(0.2)) / 2;
  EXPECT_NEAR(cross_entropy(logits, {1, 1}).value().item(), expected, 1e-12);
  EXPECT_NEAR(cross_entropy(logits, {1, 0}, 0).value().item(), -std::log(0.75), 1e-12);
  EXPECT_THROW(cross_entropy(logits, {2, 0}), IndexError);
  EXPECT_THROW(cross_entropy(logits, {0, 0}, 0), ContractError);
}

TEST(Ops, CrossEntropyUniformIsLogV) {
  Tape<double> tape(false);
  auto logits = tape.constant(Tensor<double>({3, 8}));
  EXPECT_NEAR(cross_entropy(logits, {0, 5, 7}).value().item(), std::log(8.0), 1e-12);
}

TEST(Ops, ForwardOpsStayFinite) {
  Rng rng(11);
  Tape<double> tape(false);
  auto x = tape.constant(random_tensor({4, 6}, rng, 30.0));
  EXPECT_TRUE(softmax_rows(x).value().all_finite());
  EXPECT_TRUE(gelu(x).value().all_finite());
  EXPECT_TRUE(layer_norm(x, tape.constant(ones<double>({6})), tape.constant(Tensor<double>({6}))).value().all_finite());
  EXPECT_TRUE(cross_entropy(x, {0, 1, 2, 3}).value().all_finite());
  EXPECT_TRUE(attention(x, x, x, 2).output.value().all_finite());
}

// Gradient checks for every differentiable op on randomized shapes.
class OpGradients : public ::testing::TestWithParam<std::uint64_t> {
 protected:
  std::size_t dim(std::size_t lo, std::size_t hi) { return lo + rng_.below(hi - lo + 1); }
  void SetUp() override { rng_ = Rng(GetParam()); }
  Rng rng_{0};
};

TEST_P(OpGradients, Matmul) {
  const std::size_t a = dim(1, 5), b = dim(1, 5), c = dim(1, 5);
  expect_op_gradients({{a, b}, {b, c}}, [](Tape<double>&, const Ins& in) { return matmul(in[0], in[1]); }, GetParam());
  expect_op_gradients({{a, b}, {c, b}}, [](Tape<double>&, const Ins& in) { return matmul_transposed(in[0], in[1]); },
                      GetParam());
  expect_op_gradients({{a, b}}, [](Tape<double>&, const Ins& in) { return transpose(in[0]); }, GetParam());
}

TEST_P(OpGradients, Elementwise) {
  const std::size_t r = dim(1, 4), c = dim(2, 6);
  expect_op_gradients({{r, c}, {r, c}}, [](Tape<double>&, const Ins& in) { return add(in[0], in[1]); }, GetParam());
  expect_op_gradients({{r, c}, {c}}, [](Tape<double>&, const Ins& in) { return add_bias(in[0], in[1]); }, GetParam());
  expect_op_gradients({{r, c}}, [](Tape<double>&, const Ins& in) { return scale(in[0], 0.37); }, GetParam());
  expect_op_gradients({{r, c}}, [](Tape<double>&, const Ins& in) { return gelu(in[0]); }, GetParam());
  expect_op_gradients({{r, c}}, [](Tape<double>&, const Ins& in) { return relu(in[0]); }, GetParam());
}

TEST_P(OpGradients, SoftmaxAndNorm) {
  const std::size_t r = dim(1, 4), c = dim(2, 7);
  expect_op_gradients({{r, c}}, [](Tape<double>&, const Ins& in) { return softmax_rows(in[0]); }, GetParam());
  expect_op_gradients({{r, c}, {c}, {c}},
                      [](Tape<double>&, const Ins& in) { return layer_norm(in[0], in[1], in[2]); }, GetParam());
}

TEST_P(OpGradients, CrossEntropy) {
  const std::size_t r = dim(1, 5), c = dim(2, 6);
  std::vector<int> targets;
  for (std::size_t i = 0; i < r; ++i) targets.push_back(static_cast<int>(rng_.below(c)));
  targets[0] = static_cast<int>(c) - 1;
  expect_op_gradients({{r, c}}, [&](Tape<double>&, const Ins& in) { return cross_entropy(in[0], targets); }, GetParam());
  if (r > 1) {
    expect_op_gradients({{r, c}}, [&](Tape<double>&, const Ins& in) { return cross_entropy(in[0], targets, targets[1]); },
                        GetParam());
  }
}

TEST_P(OpGradients, RowOps) {
  const std::size_t r = dim(2, 5), c = dim(1, 4);
  expect_op_gradients({{r, c}, {dim(1, 3), c}}, [](Tape<double>&, const Ins& in) { return concat_rows(in); }, GetParam());
  expect_op_gradients({{r, c}}, [&](Tape<double>&, const Ins& in) { return slice_rows(in[0], 1, r); }, GetParam());
  expect_op_gradients({{r, c}}, [&](Tape<double>&, const Ins& in) { return gather_rows(in[0], {r - 1, 0, r - 1}); },
                      GetParam());
  expect_op_gradients({{r, c}}, [&](Tape<double>&, const Ins& in) { return embedding_lookup(in[0], {1, 0, 1}); },
                      GetParam());
  expect_op_gradients({{r, c}}, [&](Tape<double>&, const Ins& in) { return reshape(in[0], {c, r}); }, GetParam());
  expect_op_gradients({{r, c}}, [](Tape<double>&, const Ins& in) { return sum(in[0]); }, GetParam());
  expect_op_gradients({{r, c}}, [](Tape<double>&, const Ins& in) { return mean(in[0]); }, GetParam());
}

TEST_P(OpGradients, Attention) {
  const std::size_t heads = dim(1, 3), dh = dim(1, 3), tq = dim(1, 5), tk = dim(1, 5);
  const std::size_t d = heads * dh;
  expect_op_gradients({{tq, d}, {tk, d}, {tk, d}},
                      [&](Tape<double>&, const Ins& in) { return attention(in[0], in[1], in[2], heads).output; },
                      GetParam());
  AttentionMask causal;
  causal.causal = true;
  expect_op_gradients({{tk, d}, {tk, d}, {tk, d}},
                      [&](Tape<double>&, const Ins& in) { return attention(in[0], in[1], in[2], heads, causal).output; },
                      GetParam());
  AttentionMask segments;
  segments.query_segments = {0, 0, 1, 1, 1};
  segments.key_segments = segments.query_segments;
  expect_op_gradients({{5, d}, {5, d}, {5, d}},
                      [&](Tape<double>&, const Ins& in) { return attention(in[0], in[1], in[2], heads, segments).output; },
                      GetParam());
}

INSTANTIATE_TEST_SUITE_P(Randomized, OpGradients, ::testing::Values(1u, 2u, 3u, 4u, 5u));

TEST(Attention, WeightsAreRowStochasticAndRespectMasks) {
  Rng rng(4);
  Tape<double> tape(false);
  auto x = tape.constant(random_tensor({4, 6}, rng));
  AttentionMask causal;
  causal.causal = true;
  const auto r = attention(x, x, x, 3, causal);
  for (std::size_t i = 0; i < 4; ++i) {
    double total = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      if (j > i) {
        EXPECT_EQ(r.weights(i, j), 0.0);
      }
      total += r.weights(i, j);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Attention, SingleKeyGetsWeightOne) {
  Rng rng(6);
  Tape<double> tape(false);
  const auto r = attention(tape.constant(random_tensor({5, 4}, rng)), tape.constant(random_tensor({1, 4}, rng)),
                           tape.constant(random_tensor({1, 4}, rng)), 2);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(r.weights(i, 0), 1.0);
}

TEST(Attention, ZeroKeysIsAContractError) {
  Tape<double> tape(false);
  EXPECT_THROW(attention(tape.constant(Tensor<double>({2, 4})), tape.constant(Tensor<double>({0, 4})),
                         tape.constant(Tensor<double>({0, 4})), 2),
               ContractError);
}

TEST(Tape, BackwardNeedsScalarAndRecording) {
  ParameterSet<double> params;
  auto& p = params.add("p", Tensor<double>::vector({1, 2}));
  {
    Tape<double> tape(true);
    EXPECT_THROW(tape.backward(tape.parameter(p)), ContractError);
  }
  {
    Tape<double> tape(false);
    EXPECT_THROW(tape.backward(sum(tape.parameter(p))), ContractError);
  }
}

TEST(Tape, GradientsAccumulateAcrossUses) {
  ParameterSet<double> params;
  auto& p = params.add("p", Tensor<double>::vector({1, 2, 3}));
  Tape<double> tape(true);
  auto v = tape.parameter(p);
  tape.backward(sum(add(v, v)));
  for (double g : p.grad.data()) EXPECT_EQ(g, 2.0);
}

TEST(Tape, DropoutIsIdentityOutsideTraining) {
  Rng rng(2);
  Tape<double> tape(false, 3);
  auto x = tape.constant(random_tensor({3, 5}, rng));
  EXPECT_EQ(dropout(x, 0.5).value(), x.value());
  tape.set_training(true);
  const auto y = dropout(x, 0.5).value();
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_TRUE(y[i] == 0.0 || std::abs(y[i] - 2 * x.value()[i]) < 1e-15);
}

TEST(ParameterSetTest, NamesAreUniqueAndSnapshotsRestore) {
  ParameterSet<float> params;
  params.add("a", Tensor<float>::vector({1, 2}));
  EXPECT_THROW(params.add("a", Tensor<float>::vector({1})), ContractError);
  const auto snap = params.snapshot();
  params.at("a").value[0] = 9;
  params.restore(snap);
  EXPECT_EQ(params.at("a").value[0], 1.0f);
  EXPECT_THROW(params.at("missing"), ContractError);
}

TEST(Init, NormalInitHasRequestedScale) {
  Rng rng(8);
  const auto t = normal_tensor<double>({200, 200}, rng);
  double sq = 0;
  for (double v : t.data()) sq += v * v;
  EXPECT_NEAR(std::sqrt(sq / static_cast<double>(t.numel())), kInitStd, 5e-4);
}

TEST(Checkpoint, RoundTripIsByteIdentical) {
  Rng rng(12);
  ParameterSet<float> fp;
  fp.add("w", random_tensor<float>({3, 4}, rng));
  fp.add("b", random_tensor<float>({4}, rng), false);
  ParameterSet<double> dp;
  dp.add("x", random_tensor<double>({2, 2}, rng));
  for (const auto& ckpt : {make_checkpoint(fp, "{\"k\":1}"), make_checkpoint(dp)}) {
    const std::string bytes = serialize_checkpoint(ckpt);
    EXPECT_EQ(serialize_checkpoint(parse_checkpoint(bytes)), bytes);
  }
  ParameterSet<float> other;
  other.add("w", Tensor<float>({3, 4}));
  other.add("b", Tensor<float>({4}));
  load_parameters(parse_checkpoint(serialize_checkpoint(make_checkpoint(fp))), other);
  EXPECT_EQ(other.at("w").value, fp.at("w").value);
  EXPECT_EQ(other.at("b").value, fp.at("b").value);
}

TEST(Checkpoint, FileRoundTripAndErrors) {
  testing::TempDir dir;
  ParameterSet<float> params;
  params.add("w", Tensor<float>::vector({1.5f, -2.25f}));
  const auto ckpt = make_checkpoint(params, "meta");
  write_checkpoint(ckpt, dir.file("m.ckpt"));
  const auto back = read_checkpoint(dir.file("m.ckpt"));
  EXPECT_EQ(back.metadata, "meta");
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ckpt));
  EXPECT_THROW(read_checkpoint(dir.file("absent.ckpt")), IoError);
  EXPECT_THROW(parse_checkpoint("NOTACKPT"), IoError);
  std::string bytes = serialize_checkpoint(ckpt);
  EXPECT_THROW(parse_checkpoint(bytes.substr(0, bytes.size() - 1)), IoError);
  ParameterSet<float> wrong;
  wrong.add("w", Tensor<float>({3}));
  EXPECT_THROW(load_parameters(ckpt, wrong), DimensionError);
  ParameterSet<float> missing;
  missing.add("v", Tensor<float>({2}));
  EXPECT_THROW(load_parameters(ckpt, missing), ContractError);
}

TEST(GradCheck, DetectsAWrongGradient) {
  ParameterSet<double> params;
  auto& p = params.add("p", Tensor<double>::vector({0.3, -0.7}));
  // Correct gradient of sum(x²) is 2x; hand the checker x instead.
  LossBuilder<double> build = [&](Tape<double>& tape) {
    auto v = tape.parameter(p);
    return matmul(v, transpose(v));
  };
  std::vector<Tensor<double>> wrong = {p.value};
  EXPECT_FALSE(grad_check(params, build, wrong).passed());
  EXPECT_TRUE(grad_check(params, build).passed());
}


TEST(Ops, SoftmaxHandExamples) {
  Tape<double> tape(false);
  auto u = softmax_rows(tape.constant(Tensor<double>({1, 8}))).value();
  for (double v : u.data()) EXPECT_NEAR(v, 0.125, 1e-15);
  auto s = softmax_rows(tape.constant(Tensor<double>::vector({0, std::log(3.0)}))).value();
  EXPECT_NEAR(s[0], 0.25, 1e-12);
  EXPECT_NEAR(s[1], 0.75, 1e-12);
}

TEST(Ops, SoftmaxRowsSumToOneProperty) {
  Rng rng(21);
  Tape<double> tape(false);
  for (int trial = 0; trial < 50; ++trial) {
    const auto v = softmax_rows(tape.constant(random_tensor({1 + rng.below(5), 1 + rng.below(9)}, rng, 20.0))).value();
    for (std::size_t r = 0; r < v.rows(); ++r) {
      double total = 0;
      for (double x : v.row(r)) {
        EXPECT_GE(x, 0.0);
        total += x;
      }
      EXPECT_NEAR(total, 1.0, 1e-6);
    }
  }
}

TEST(Ops, LayerNormHandExamples) {
  Tape<double> tape(false);
  auto gain = tape.constant(ones<double>({2}));
  auto zero2 = tape.constant(Tensor<double>({2}));
  auto y = layer_norm(tape.constant(Tensor<double>::vector({1, 3})), gain, zero2, 0.0).value();
  EXPECT_NEAR(y[0], -1.0, 1e-15);
  EXPECT_NEAR(y[1], 1.0, 1e-15);
  auto c = layer_norm(tape.constant(Tensor<double>::vector({5, 5, 5})), tape.constant(ones<double>({3})),
                      tape.constant(Tensor<double>({3})))
               .value();
  for (double v : c.data()) EXPECT_NEAR(v, 0.0, 1e-12);
  auto b = layer_norm(tape.constant(Tensor<double>::vector({2, 7, -1})), tape.constant(Tensor<double>({3})),
                      tape.constant(Tensor<double>::vector({0.5, -1, 2})))
               .value();
  EXPECT_EQ(b, Tensor<double>::vector({0.5, -1, 2}));
}

TEST(Ops, CrossEntropyConfidentIsNearZero) {
  Tape<double> tape(false);
  auto logits = tape.constant(Tensor<double>::vector({0, 30, 0, 0}));
  EXPECT_NEAR(cross_entropy(logits, {1}).value().item(), 0.0, 1e-12);
}

TEST(Ops, MatmulRowVectorMismatch) {
  Tape<double> tape(false);
  EXPECT_THROW(matmul(tape.constant(Tensor<double>({1, 3})), tape.constant(Tensor<double>({2, 2}))), DimensionError);
}

TEST(Tape, BackwardHandDerivatives) {
  ParameterSet<double> params;
  auto& x = params.add("x", Tensor<double>::matrix({{3}}));
  auto& y = params.add("y", Tensor<double>::matrix({{5}}));
  {
    Tape<double> tape(true);
    auto v = tape.parameter(x);
    tape.backward(matmul(v, v));
    EXPECT_EQ(x.grad[0], 6.0);
  }
  params.zero_grad();
  x.value[0] = 2;
  {
    Tape<double> tape(true);
    tape.backward(matmul(tape.parameter(x), tape.parameter(y)));
    EXPECT_EQ(x.grad[0], 5.0);
    EXPECT_EQ(y.grad[0], 2.0);
  }
  EXPECT_EQ(x.value[0], 2.0);
  EXPECT_EQ(y.value[0], 5.0);
}

TEST(GradCheck, TwoLayerNetworkPasses) {
  Rng rng(17);
  ParameterSet<double> params;
  auto l1 = Linear<double>::create(params, "l1", 5, 7, rng);
  auto l2 = Linear<double>::create(params, "l2", 7, 3, rng);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = random_tensor(params[i].value.shape(), rng, 0.5);
  const auto input = random_tensor({4, 5}, rng);
  LossBuilder<double> build = [&](Tape<double>& tape) {
    auto h = gelu(l1(tape, tape.constant(input)));
    return cross_entropy(l2(tape, h), {0, 2, 1, 2});
  };
  GradCheckOptions options;
  options.samples_per_parameter = 100;
  const auto report = grad_check(params, build, options);
  EXPECT_TRUE(report.passed()) << report.max_relative_error();
  EXPECT_LT(report.max_relative_error(), 1e-4);
  EXPECT_EQ(report.entries.size(), 4u);
}

TEST(GradCheck, CorruptedGradientFails) {
  Rng rng(18);
  ParameterSet<double> params;
  auto lin = Linear<double>::create(params, "lin", 3, 2, rng);
  for (std::size_t i = 0; i < params.size(); ++i) params[i].value = random_tensor(params[i].value.shape(), rng);
  const auto input = random_tensor({2, 3}, rng);
  LossBuilder<double> build = [&](Tape<double>& tape) { return cross_entropy(lin(tape, tape.constant(input)), {1, 0}); };
  auto grads = analytic_gradients(params, build);
  EXPECT_TRUE(grad_check(params, build, grads).passed());
  for (auto& g : grads) {
    for (auto& v : g.storage()) v *= 1.01;
  }
  EXPECT_FALSE(grad_check(params, build, grads).passed());
}

TEST(GradCheck, NoParametersGivesEmptyReport) {
  ParameterSet<double> params;
  LossBuilder<double> build = [](Tape<double>& tape) { return tape.constant(Tensor<double>::scalar(1)); };
  const auto report = grad_check(params, build);
  EXPECT_TRUE(report.entries.empty());
  EXPECT_TRUE(report.passed());
}

}  // namespace
}  // namespace misc::numerics

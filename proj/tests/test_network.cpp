#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "evoshift/error.hpp"
#include "evoshift/network.hpp"
#include "gradcheck.hpp"

using namespace evoshift;

namespace {

Tensor random_batch(std::size_t n, ImageShape s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t({n, s.channels, s.height, s.width});
  for (auto& v : t.vec()) v = u(rng);
  return t;
}

std::vector<int> random_labels(std::size_t n, int classes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

void expect_gradients_match(const char* arch, ImageShape shape, std::uint64_t seed) {
  auto net = init_network(parse_arch(arch), shape, seed);
  // Non-zero biases so ReLU boundaries are not aligned with zero inputs.
  std::mt19937_64 rng(seed + 99);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (const auto& p : net.plan())
    for (std::size_t i = 0; i < p.bias_count; ++i) net.params()[p.bias_offset + i] = u(rng);
  const auto batch = random_batch(8, shape, seed + 1);
  const auto labels = random_labels(8, net.num_classes(), seed + 2);
  net.backward(batch, labels);
  const std::vector<double> analytic(net.grads().begin(), net.grads().end());
  const auto numeric = oracle::numeric_gradient(net, batch, labels);
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
  EXPECT_LT(worst, 1e-4) << arch;
}

}  // namespace

TEST(InitNetwork, DeterministicInSeed) {
  const auto spec = parse_arch("4C3-P-8FC-3S");
  const auto a = init_network(spec, {1, 6, 6}, 7);
  const auto b = init_network(spec, {1, 6, 6}, 7);
  EXPECT_TRUE(std::equal(a.params().begin(), a.params().end(), b.params().begin(), b.params().end()));
  const auto c = init_network(spec, {1, 6, 6}, 1);
  const auto d = init_network(spec, {1, 6, 6}, 0);
  EXPECT_FALSE(std::equal(c.params().begin(), c.params().end(), d.params().begin(), d.params().end()));
  for (double g : a.grads()) EXPECT_EQ(g, 0.0);
}

TEST(InitNetwork, WeightsWithinFanInBound) {
  const auto net = init_network(parse_arch("4C3-P-8FC-3S"), {2, 6, 6}, 3);
  for (const auto& p : net.plan()) {
    const double bound = p.fan_in ? std::sqrt(6.0 / static_cast<double>(p.fan_in)) : 0.0;
    for (std::size_t i = 0; i < p.weight_count; ++i) EXPECT_LE(std::abs(net.params()[p.weight_offset + i]), bound);
    for (std::size_t i = 0; i < p.bias_count; ++i) EXPECT_EQ(net.params()[p.bias_offset + i], 0.0);
  }
}

TEST(InitNetwork, GrayNetParameterCount) {
  // conv 24*1*9+24, conv 48*24*9+48, fc (48*7*7)*256+256, softmax 256*10+10
  EXPECT_EQ(parameter_count(parse_arch("24C3-P-48C3-P-256FC-10S"), {1, 28, 28}), 615594u);
  const auto net = init_network(parse_arch("24C3-P-48C3-P-256FC-10S"), {1, 28, 28}, 0);
  EXPECT_EQ(net.params().size(), 615594u);
  EXPECT_EQ(net.grads().size(), net.params().size());
}

TEST(InitNetwork, ColorNetParameterCount) {
  EXPECT_EQ(parameter_count(parse_arch("32C3-32C3-P-64C3-64C3-P-128C3-128C3-P-512FC-10S"), {3, 32, 32}),
            1341226u);
}

TEST(InitNetwork, PoolingBelowOnePixelIsRejected) {
  try {
    init_network(parse_arch("P-P-P-2S"), {1, 4, 4}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeUnderflow);
  }
  EXPECT_NO_THROW(init_network(parse_arch("P-P-2S"), {1, 4, 4}, 0));
  // Floor semantics: 5x5 pools to 2x2.
  const auto net = init_network(parse_arch("P-2S"), {1, 5, 5}, 0);
  EXPECT_EQ(net.plan()[0].out.height, 2u);
}

TEST(Forward, ZeroWeightsGiveUniformRows) {
  const auto net = Network(parse_arch("10S"), {1, 3, 3}, 0);
  const auto probs = net.forward(random_batch(5, {1, 3, 3}, 1));
  for (double p : probs.data()) EXPECT_DOUBLE_EQ(p, 0.1);
}

TEST(Forward, RowsAreProbabilityVectors) {
  const auto net = init_network(parse_arch("4C3-P-6FC-5S"), {2, 6, 6}, 11);
  const auto probs = net.forward(random_batch(16, {2, 6, 6}, 2));
  for (std::size_t i = 0; i < 16; ++i) {
    double sum = 0.0;
    for (double p : probs.row(i)) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-6);
  }
}

TEST(Forward, HandComputedConvExample) {
  // 1C1 with weight 2, bias 0.5 maps [.1 .2 .3 .4] to [.7 .9 1.1 1.3];
  // the softmax layer reads pixel 0 for class 0 and pixel 3 for class 1.
  Network net(parse_arch("1C1-2S"), {1, 2, 2}, 0);
  auto p = net.params();
  p[0] = 2.0;
  p[1] = 0.5;
  const std::size_t w = net.plan()[1].weight_offset;
  p[w + 0] = 1.0;
  p[w + 7] = 1.0;
  const auto probs = net.forward(Tensor({1, 1, 2, 2}, {0.1, 0.2, 0.3, 0.4}));
  EXPECT_NEAR(probs[0], 0.3543436937742045, 1e-12);
  EXPECT_NEAR(probs[1], 0.6456563062257954, 1e-12);
}

TEST(Forward, RejectsWrongShape) {
  const auto net = init_network(parse_arch("3S"), {1, 4, 4}, 0);
  try {
    net.forward(random_batch(2, {1, 4, 5}, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(Forward, Deterministic) {
  const auto net = init_network(parse_arch("3C3-P-4FC-3S"), {1, 6, 6}, 5);
  const auto batch = random_batch(4, {1, 6, 6}, 6);
  EXPECT_EQ(net.forward(batch), net.forward(batch));
}

TEST(CrossEntropy, Examples) {
  Tensor uniform({1, 10}, 0.1);
  EXPECT_NEAR(cross_entropy(uniform, std::vector<int>{3}), std::log(10.0), 1e-12);
  EXPECT_EQ(cross_entropy(Tensor({1, 3}, {0.0, 1.0, 0.0}), std::vector<int>{1}), 0.0);
  EXPECT_NEAR(cross_entropy(Tensor({1, 2}, {0.7, 0.3}), std::vector<int>{1}), 1.2039728043259361, 1e-12);
}

TEST(CrossEntropy, FloorsZeroProbability) {
  const double loss = cross_entropy(Tensor({1, 2}, {1.0, 0.0}), std::vector<int>{1});
  EXPECT_NEAR(loss, -std::log(1e-12), 1e-9);
}

TEST(Backward, MatchesFiniteDifferencesPerLayerKind) {
  expect_gradients_match("3S", {1, 3, 3}, 1);              // softmax only
  expect_gradients_match("2C3-3S", {1, 4, 4}, 2);          // conv
  expect_gradients_match("2C1-P-3S", {1, 5, 5}, 3);        // pool
  expect_gradients_match("5FC-3S", {1, 3, 3}, 4);          // fully connected
  expect_gradients_match("3C3-P-5FC-4S", {2, 6, 6}, 5);    // three layers
}

TEST(Backward, ZeroLogitBiasGradientIsUniformMinusFrequency) {
  Network net(parse_arch("4S"), {1, 2, 2}, 0);
  const auto batch = random_batch(8, {1, 2, 2}, 3);
  const std::vector<int> labels = {0, 1, 2, 3, 0, 1, 2, 0};
  net.backward(batch, labels);
  const std::size_t b = net.plan()[0].bias_offset;
  const double freq[] = {3.0 / 8, 2.0 / 8, 2.0 / 8, 1.0 / 8};
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(net.grads()[b + static_cast<std::size_t>(k)], 0.25 - freq[k], 1e-15);
}

TEST(Backward, DuplicatedBatchGivesSameGradient) {
  auto net = init_network(parse_arch("2C3-P-4FC-3S"), {1, 4, 4}, 8);
  const auto batch = random_batch(5, {1, 4, 4}, 9);
  const auto labels = random_labels(5, 3, 10);
  net.backward(batch, labels);
  const std::vector<double> once(net.grads().begin(), net.grads().end());

  auto doubled = batch.vec();
  doubled.insert(doubled.end(), batch.vec().begin(), batch.vec().end());
  auto labels2 = labels;
  labels2.insert(labels2.end(), labels.begin(), labels.end());
  net.backward(Tensor({10, 1, 4, 4}, doubled), labels2);
  for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(net.grads()[i], once[i], 1e-12);
}

TEST(Evaluate, PerfectNetworkScoresOne) {
  // Logits equal to the inputs; input one-hot on the label.
  Network net(parse_arch("2S"), {1, 1, 2}, 0);
  auto p = net.params();
  p[0] = 10.0;
  p[3] = 10.0;
  const auto ds = make_dataset({1, 1, 2}, {1, 0, 0, 1, 0, 1}, {0, 1, 1}, 2);
  EXPECT_EQ(evaluate(net, ds).accuracy, 1.0);
}

TEST(Evaluate, ZeroLogitsResolveTiesToClassZero) {
  Network net(parse_arch("10S"), {1, 2, 2}, 0);
  std::vector<int> labels(50);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 10);
  const auto ds = make_dataset({1, 2, 2}, std::vector<double>(200, 0.5), labels, 10);
  EXPECT_DOUBLE_EQ(evaluate(net, ds).accuracy, 0.1);
}

TEST(Evaluate, FourSampleToyByHand) {
  // Identity logits: p = softmax(x). Samples (x, y):
  //   ([1,0],0) correct   ([0,1],0) wrong   ([.5,.5],1) tie->0 wrong   ([0,.25],1) correct
  Network net(parse_arch("2S"), {1, 1, 2}, 0);
  auto p = net.params();
  p[0] = 1.0;
  p[3] = 1.0;
  const auto ds = make_dataset({1, 1, 2}, {1, 0, 0, 1, 0.5, 0.5, 0, 0.25}, {0, 0, 1, 1}, 2);
  const auto r = evaluate(net, ds);
  EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
  EXPECT_NEAR(r.mean_loss, 0.7239024938688087, 1e-12);
}

TEST(Evaluate, InvariantUnderRowPermutation) {
  const auto net = init_network(parse_arch("3C3-P-3S"), {1, 4, 4}, 21);
  const auto batch = random_batch(30, {1, 4, 4}, 22);
  const auto ds = LabeledDataset{batch, random_labels(30, 3, 23), 3};
  const double base = evaluate(net, ds).accuracy;
  std::vector<std::size_t> order(30);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    EXPECT_EQ(evaluate(net, select(ds, order)).accuracy, base);
  }
}

TEST(Evaluate, EmptyDatasetRejected) {
  const auto net = init_network(parse_arch("2S"), {1, 1, 2}, 0);
  try {
    evaluate(net, LabeledDataset{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyDataset);
  }
}

#include "implylp/error.hpp"
#include "implylp/model.hpp"
#include "support/nets.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace implylp;
using implylp::test_support::random_conv_network;
using implylp::test_support::random_dense_network;
using implylp::test_support::reference_forward;

namespace {

Network single_dense(std::size_t in, std::size_t rows, std::vector<double> w, std::vector<double> b) {
  return NetworkBuilder({in}).dense(rows, std::move(w), std::move(b)).build("dense");
}

Network logits_net(std::vector<double> logits) {
  // Constant logits regardless of the (single) input.
  std::vector<double> w(logits.size(), 0.0);
  return single_dense(1, logits.size(), w, logits);
}

} // namespace

TEST(Forward, SingleDenseLayer) {
  const Network net = single_dense(2, 1, {1, -1}, {0});
  EXPECT_EQ(forward(net, std::vector<double>{3, 1}), std::vector<double>{2});
}

TEST(Forward, ReluClampsNegatives) {
  const Network net = NetworkBuilder({2}).dense(2, {1, 0, 0, 1}, {0, 0}).relu().build("r");
  EXPECT_EQ(forward(net, std::vector<double>{-2, 5}), (std::vector<double>{0, 5}));
}

TEST(Forward, MatchesReferenceOnDenseNets) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Network net = random_dense_network(seed);
    Rng rng(seed + 100);
    const auto x = test_support::random_vector(rng, net.input_size());
    const auto got = forward(net, x);
    const auto want = reference_forward(net, x);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k)
      EXPECT_NEAR(got[k], want[k], 1e-12);
  }
}

TEST(Forward, MatchesReferenceOnConvNets) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Network net = random_conv_network(seed);
    Rng rng(seed + 7);
    const auto x = test_support::random_vector(rng, net.input_size());
    const auto got = forward(net, x);
    const auto want = reference_forward(net, x);
    for (std::size_t k = 0; k < got.size(); ++k)
      EXPECT_NEAR(got[k], want[k], 1e-12);
  }
}

TEST(Forward, StridedConvolutionShape) {
  Rng rng(3);
  const Network net = NetworkBuilder({1, 5, 5})
                          .conv2d(1, 3, 3, test_support::random_vector(rng, 9), {0.1}, {2, 2})
                          .flatten()
                          .build("strided");
  EXPECT_EQ(net.layer(0).output_shape, (Shape{1, 2, 2}));
  const auto x = test_support::random_vector(rng, 25);
  const auto got = forward(net, x);
  const auto want = reference_forward(net, x);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_NEAR(got[k], want[k], 1e-12);
}

TEST(Forward, BitIdenticalOnRepeat) {
  const Network net = random_conv_network(11);
  Rng rng(5);
  const auto x = test_support::random_vector(rng, net.input_size());
  EXPECT_EQ(forward(net, x), forward(net, x));
}

TEST(Forward, TraceEndsWithLogits) {
  const Network net = random_dense_network(4);
  const std::vector<double> x(net.input_size(), 0.25);
  const ForwardTrace t = forward_trace(net, x);
  ASSERT_EQ(t.values.size(), net.num_layers());
  EXPECT_EQ(t.values.back(), forward(net, x));
}

TEST(Softmax, ClosedForms) {
  auto p = softmax(std::vector<double>{0, 0});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  p = softmax(std::vector<double>{1000, 1000});
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
  p = softmax(std::vector<double>{std::log(2.0), 0});
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, SumsToOneAndShiftInvariant) {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    auto z = test_support::random_vector(rng, 5, 20.0);
    auto p = softmax(z);
    double s = 0;
    for (double v : p)
      s += v;
    EXPECT_NEAR(s, 1.0, 1e-12);
    const double c = rng.uniform(-50, 50);
    for (double &v : z)
      v += c;
    const auto q = softmax(z);
    for (std::size_t k = 0; k < p.size(); ++k)
      EXPECT_NEAR(p[k], q[k], 1e-12);
  }
}

TEST(Softmax, RejectsNonFinite) {
  EXPECT_THROW(softmax(std::vector<double>{NAN, 0}), NumericError);
}

TEST(Argmax, SmallestIndexWinsTies) {
  EXPECT_EQ(argmax(std::vector<double>{1, 3, 3}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{0, 0}), 0u);
}

TEST(LogPr, LogitDifference) {
  // Classes are 0-based here: (0, 1) is the first and second class.
  const std::vector<double> x{0};
  EXPECT_DOUBLE_EQ(log_pr(logits_net({2, 0}), x, {0, 1}), 2.0);
  EXPECT_DOUBLE_EQ(log_pr(logits_net({1.5, 1.5}), x, {0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(log_pr(logits_net({1.5, 1.5}), x, {1, 0}), 0.0);
}

TEST(LogPr, MatchesSoftmaxQuotient) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Network net = random_dense_network(seed);
    Rng rng(seed);
    const auto x = test_support::random_vector(rng, net.input_size());
    const auto p = softmax(forward(net, x));
    const double want = p[0] / p[1];
    EXPECT_NEAR(std::exp(log_pr(net, x, {0, 1})) / want, 1.0, 1e-9);
  }
}

TEST(LogRpr, DifferenceOfLogPrs) {
  const std::vector<double> x{0};
  EXPECT_DOUBLE_EQ(log_rpr(logits_net({2, 0}), logits_net({1, 0}), x, {0, 1}), 1.0);
  const Network n = random_dense_network(2);
  const std::vector<double> y(n.input_size(), 0.3);
  EXPECT_EQ(log_rpr(n, n, y, {0, 1}), 0.0);
}

TEST(LogRpr, SoftmaxQuotientAndSymmetries) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Network a = random_dense_network(seed);
    Rng rng(seed + 1);
    const Network b = perturb_network(a, rng, 0.3, "b");
    const auto x = test_support::random_vector(rng, a.input_size());
    const auto p = softmax(forward(a, x));
    const auto q = softmax(forward(b, x));
    const double want = (p[0] * q[1]) / (p[1] * q[0]);
    const double v = log_rpr(a, b, x, {0, 1});
    EXPECT_NEAR(std::exp(v) / want, 1.0, 1e-9);
    EXPECT_EQ(v, log_pr(a, x, {0, 1}) - log_pr(b, x, {0, 1}));
    EXPECT_EQ(v, -log_rpr(b, a, x, {0, 1}));
    EXPECT_EQ(v, -log_rpr(a, b, x, {1, 0}));
  }
}

TEST(Compatibility, InputAndOutputSizes) {
  auto net = [](std::size_t in, std::size_t out) {
    return single_dense(in, out, std::vector<double>(in * out, 0.1), std::vector<double>(out, 0));
  };
  EXPECT_TRUE(check_compatible(net(4, 3), net(4, 3)));
  EXPECT_FALSE(check_compatible(net(4, 3), net(4, 2)));
  EXPECT_FALSE(check_compatible(net(4, 3), net(5, 3)));
  EXPECT_THROW(require_compatible(net(4, 3), net(5, 3)), CompatibilityError);
}

TEST(Network, Validation) {
  EXPECT_THROW(Network("empty", {}), ShapeError);
  // bias length differs from the row count
  EXPECT_THROW(single_dense(2, 2, {1, 0, 0, 1}, {0}), ShapeError);
  // Relu input does not match the previous output
  std::vector<LayerSpec> layers{LayerSpec::dense(2, 2, {1, 0, 0, 1}, {0, 0}),
                                LayerSpec::relu({3})};
  EXPECT_THROW(Network("bad", layers), ShapeError);
}

TEST(Network, PairValidation) {
  EXPECT_THROW(validate_pair({0, 0}, 3), ArgumentError);
  EXPECT_THROW(validate_pair({0, 3}, 3), ArgumentError);
  EXPECT_NO_THROW(validate_pair({2, 0}, 3));
}

TEST(Network, MaxPoolWindowsAndLinearMap) {
  const Network net = NetworkBuilder({1, 2, 4}).max_pool2d(2).flatten().build("pool");
  EXPECT_EQ(net.layer(0).output_shape, (Shape{1, 1, 2}));
  EXPECT_EQ(pool_window(net.layer(0), 1), (std::vector<std::size_t>{2, 3, 6, 7}));
  const auto out = forward(net, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 0});
  EXPECT_EQ(out, (std::vector<double>{6, 7}));
  const Network rect = NetworkBuilder({1, 1, 2}).max_pool2d({1, 2}).build("rect");
  EXPECT_EQ(forward(rect, std::vector<double>{-1, 0.5}), std::vector<double>{0.5});
}

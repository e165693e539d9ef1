#include "implylp/bounds.hpp"
#include "implylp/error.hpp"
#include "implylp/oracle.hpp"
#include "support/nets.hpp"

#include <gtest/gtest.h>

using namespace implylp;

namespace {

double width(const BoundsMap &b, std::size_t k, std::size_t i) {
  return b.layers[k].pre_high[i] - b.layers[k].pre_low[i];
}

// Every layer value of every sampled input lies in its interval.
void expect_contains(const Network &net, const InputRegion &region, const BoundsMap &b,
                     std::size_t n, std::uint64_t seed) {
  const PointBatch pts = region_points(region, n, seed);
  std::size_t bad = 0;
  for (std::size_t k = 0; k < pts.count(); ++k)
    bad += !trace_within(net, forward_trace(net, pts.point(k)), b, 1e-9);
  EXPECT_EQ(bad, 0u) << net.name();
}

} // namespace

TEST(RegionBox, ClippingAndPointRegion) {
  Box b = region_box({{0.5}, 0.1, std::vector<double>{0}, std::vector<double>{1}});
  EXPECT_NEAR(b.low[0], 0.4, 1e-15);
  EXPECT_NEAR(b.high[0], 0.6, 1e-15);
  b = region_box({{0.05}, 0.1, std::vector<double>{0}, std::vector<double>{1}});
  EXPECT_EQ(b.low[0], 0.0);
  EXPECT_NEAR(b.high[0], 0.15, 1e-15);
  b = region_box({{0.3, -2}, 0.0});
  EXPECT_EQ(b.low, (std::vector<double>{0.3, -2}));
  EXPECT_EQ(b.high, b.low);
}

TEST(RegionBox, Errors) {
  EXPECT_THROW(region_box({{2.0}, 0.1, std::vector<double>{0}, std::vector<double>{1}}), RegionError);
  EXPECT_THROW(region_box({{0.5}, -0.1}), RegionError);
  EXPECT_THROW(region_box({{}, 0.1}), RegionError);
}

TEST(Propagate, SignSplitAndRelu) {
  const Network net = NetworkBuilder({2}).dense(1, {1, -1}, {0}).relu().build("d");
  const BoundsMap b = propagate_intervals(net, Box{{0, 0}, {1, 1}});
  EXPECT_EQ(b.layers[0].pre_low[0], -1.0);
  EXPECT_EQ(b.layers[0].pre_high[0], 1.0);
  EXPECT_EQ(b.layers[1].post_low[0], 0.0);
  EXPECT_EQ(b.layers[1].post_high[0], 1.0);

  const Network neg = NetworkBuilder({1}).dense(1, {1}, {-1.5}).relu().build("n");
  const BoundsMap c = propagate_intervals(neg, Box{{-0.5}, {0.5}});
  EXPECT_EQ(c.layers[1].pre_low[0], -2.0);
  EXPECT_EQ(c.layers[1].pre_high[0], -1.0);
  EXPECT_EQ(c.layers[1].post_low[0], 0.0);
  EXPECT_EQ(c.layers[1].post_high[0], 0.0);
}

TEST(Propagate, MaxPoolTakesMaxOfLowsAndHighs) {
  const Network net = NetworkBuilder({1, 1, 2}).max_pool2d({1, 2}).build("p");
  const BoundsMap b = propagate_intervals(net, Box{{0.2, 0.5}, {0.9, 0.6}});
  EXPECT_EQ(b.layers[0].post_low[0], 0.5);
  EXPECT_EQ(b.layers[0].post_high[0], 0.9);
}

TEST(Propagate, PhaseClassification) {
  EXPECT_EQ(classify_phase(0.1, 1.0), NeuronPhase::Active);
  EXPECT_EQ(classify_phase(-1.0, -0.1), NeuronPhase::Inactive);
  EXPECT_EQ(classify_phase(-1.0, 1.0), NeuronPhase::Unstable);
  // bounds touching zero are widened before classification
  EXPECT_EQ(classify_phase(0.0, 1.0), NeuronPhase::Unstable);
  EXPECT_EQ(classify_phase(-1.0, 0.0), NeuronPhase::Unstable);
  EXPECT_EQ(classify_phase(2e-9, 1.0), NeuronPhase::Active);
  EXPECT_EQ(classify_phase(0.0, 1.0, 0.0), NeuronPhase::Active);
  EXPECT_EQ(classify_phase(-1.0, 0.0, 0.0), NeuronPhase::Inactive);
}

TEST(Propagate, MonteCarloContainmentDense) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = make_fixture(FixtureKind::RandomSmall, seed);
    const InputRegion region{f.center, 0.2};
    expect_contains(f.net1, region, propagate_intervals(f.net1, region), 10000, seed);
  }
}

TEST(Propagate, MonteCarloContainmentConv) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Network net = test_support::random_conv_network(seed);
    Rng rng(seed);
    const InputRegion region{test_support::random_vector(rng, net.input_size()), 0.1};
    expect_contains(net, region, propagate_intervals(net, region), 2000, seed);
  }
}

TEST(Propagate, SerialParallelIdentical) {
  const Network net = test_support::random_conv_network(5);
  const InputRegion region{std::vector<double>(net.input_size(), 0.1), 0.3};
  const BoundsMap a = propagate_intervals(net, region, ExecPolicy::Serial);
  const BoundsMap b = propagate_intervals(net, region, ExecPolicy::Parallel);
  EXPECT_TRUE(bounds_contained(a, b, 0.0));
  EXPECT_TRUE(bounds_contained(b, a, 0.0));
}

TEST(Propagate, MonotoneInDelta) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = make_fixture(FixtureKind::RandomSmall, seed);
    const BoundsMap small = propagate_intervals(f.net1, InputRegion{f.center, 0.01});
    const BoundsMap big = propagate_intervals(f.net1, InputRegion{f.center, 0.2});
    EXPECT_TRUE(bounds_contained(small, big, 0.0));
  }
}

TEST(Propagate, PointRegionIsTight) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f = make_fixture(FixtureKind::RandomSmall, seed);
    const BoundsMap b = propagate_intervals(f.net1, InputRegion{f.center, 0.0});
    const ForwardTrace t = forward_trace(f.net1, f.center);
    for (std::size_t k = 0; k < f.net1.num_layers(); ++k)
      for (std::size_t i = 0; i < t.values[k].size(); ++i) {
        EXPECT_NEAR(b.layers[k].post_low[i], t.values[k][i], 1e-9);
        EXPECT_NEAR(b.layers[k].post_high[i], t.values[k][i], 1e-9);
      }
  }
}

TEST(Refine, SingleLayerUnchanged) {
  const Network net = NetworkBuilder({2}).dense(2, {1, -1, 0.5, 2}, {0, 0.1}).build("one");
  const InputRegion region{{0.1, 0.2}, 0.3};
  const BoundsMap coarse = propagate_intervals(net, region);
  RefineDiagnostics diag;
  const BoundsMap fine = refine_bounds_lp(net, region, coarse, &diag);
  EXPECT_TRUE(bounds_contained(fine, coarse, 0.0));
  EXPECT_TRUE(bounds_contained(coarse, fine, 0.0));
  EXPECT_EQ(diag.lp_solves, 0u);
}

TEST(Refine, ContainedNarrowerAndSound) {
  std::size_t narrowed = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Fixture f = make_fixture(FixtureKind::RandomSmall, seed);
    const InputRegion region{f.center, 0.2};
    const BoundsMap coarse = propagate_intervals(f.net1, region);
    RefineDiagnostics diag;
    const BoundsMap fine = refine_bounds_lp(f.net1, region, coarse, &diag);
    EXPECT_TRUE(bounds_contained(fine, coarse, 0.0));
    EXPECT_EQ(diag.fallbacks, 0u);
    for (std::size_t k = 0; k < f.net1.num_layers(); ++k)
      for (std::size_t i = 0; i < fine.layers[k].pre_low.size(); ++i)
        narrowed += width(fine, k, i) < width(coarse, k, i) - 1e-9;
    if (seed < 10)
      expect_contains(f.net1, region, fine, 10000, seed);
  }
  EXPECT_GT(narrowed, 0u);
}

TEST(Refine, ConvNetworkSound) {
  const Network net = test_support::random_conv_network(2);
  Rng rng(2);
  const InputRegion region{test_support::random_vector(rng, net.input_size()), 0.05};
  const BoundsMap coarse = propagate_intervals(net, region);
  const BoundsMap fine = refine_bounds_lp(net, region, coarse);
  EXPECT_TRUE(bounds_contained(fine, coarse, 0.0));
  expect_contains(net, region, fine, 2000, 2);
}

TEST(Refine, RejectsForeignCoarseBounds) {
  const Fixture f = make_fixture(FixtureKind::RandomSmall, 1);
  const BoundsMap coarse = propagate_intervals(f.net1, InputRegion{f.center, 0.1});
  EXPECT_THROW(refine_bounds_lp(f.net1, InputRegion{f.center, 0.2}, coarse), ArgumentError);
}

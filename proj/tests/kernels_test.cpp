#include "implylp/error.hpp"
#include "implylp/kernels.hpp"
#include "implylp/oracle.hpp"
#include "support/nets.hpp"

#include <gtest/gtest.h>

using namespace implylp;

namespace {

PointBatch random_batch(std::size_t dim, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointBatch b;
  b.dim = dim;
  for (std::size_t k = 0; k < n; ++k)
    b.push_back(test_support::random_vector(rng, dim));
  return b;
}

// Large enough to cross the parallel thresholds.
LinearMap wide_map(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t rows = 700, cols = 40;
  const Network net = NetworkBuilder({cols})
                          .dense(rows, test_support::random_vector(rng, rows * cols),
                                 test_support::random_vector(rng, rows))
                          .build("wide");
  return linear_map(net.layer(0));
}

} // namespace

TEST(Kernels, IntervalAffineSerialParallelBitIdentical) {
  for (int jobs : {1, 2, 4}) {
    set_parallel_jobs(jobs);
    const LinearMap m = wide_map(static_cast<std::uint64_t>(jobs));
    Rng rng(42);
    std::vector<double> lo = test_support::random_vector(rng, m.cols), hi = lo;
    for (double &v : hi)
      v += rng.uniform01();
    std::vector<double> a_lo(m.rows), a_hi(m.rows), b_lo(m.rows), b_hi(m.rows);
    kernels::interval_affine_serial(m, lo, hi, a_lo, a_hi);
    kernels::interval_affine_parallel(m, lo, hi, b_lo, b_hi);
    EXPECT_EQ(a_lo, b_lo);
    EXPECT_EQ(a_hi, b_hi);
  }
  set_parallel_jobs(0);
}

TEST(Kernels, IntervalAffineSignSplit) {
  const Network net = NetworkBuilder({2}).dense(1, {1, -1}, {0}).build("d");
  const LinearMap m = linear_map(net.layer(0));
  std::vector<double> lo{0, 0}, hi{1, 1}, olo(1), ohi(1);
  interval_affine(m, lo, hi, olo, ohi, ExecPolicy::Serial);
  EXPECT_EQ(olo[0], -1.0);
  EXPECT_EQ(ohi[0], 1.0);
}

TEST(Kernels, LogRprBatchSerialParallelBitIdentical) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Network a = test_support::random_conv_network(seed);
    Rng rng(seed);
    const Network b = perturb_network(a, rng, 0.1, "b");
    const PointBatch pts = random_batch(a.input_size(), 500, seed);
    const auto s = kernels::log_rpr_batch_serial(a, b, pts, {0, 2});
    const auto p = kernels::log_rpr_batch_parallel(a, b, pts, {0, 2});
    EXPECT_EQ(s, p);
    for (std::size_t k = 0; k < 20; ++k)
      EXPECT_EQ(s[k], log_rpr(a, b, pts.point(k), {0, 2}));
  }
}

TEST(Kernels, DecisionViolationsSerialParallelAgree) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Network a = test_support::random_dense_network(seed);
    Rng rng(seed);
    const Network b = perturb_network(a, rng, 0.5, "b");
    const PointBatch pts = random_batch(a.input_size(), 2000, seed);
    std::size_t brute = 0;
    for (std::size_t k = 0; k < pts.count(); ++k)
      brute += predict(b, pts.point(k)) == 0 && predict(a, pts.point(k)) != 0;
    EXPECT_EQ(kernels::count_decision_violations_serial(a, b, pts, 0), brute);
    EXPECT_EQ(kernels::count_decision_violations_parallel(a, b, pts, 0), brute);
  }
}

TEST(Kernels, DispatchValidatesInputs) {
  const Network a = test_support::random_dense_network(1);
  const PointBatch wrong = random_batch(a.input_size() + 1, 3, 0);
  EXPECT_THROW(log_rpr_batch(a, a, wrong, {0, 1}), ShapeError);
  const PointBatch ok = random_batch(a.input_size(), 3, 0);
  EXPECT_THROW(log_rpr_batch(a, a, ok, {0, 0}), ArgumentError);
  EXPECT_THROW(count_decision_violations(a, a, ok, 9), ArgumentError);
}

#include "implylp/oracle.hpp"

#include "implylp/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace implylp {

namespace {

constexpr std::size_t kMaxCornerDim = 12;
constexpr std::size_t kMaxGridDim = 4;

SampleOracleResult extrema(const Network &net1, const Network &net2, const PointBatch &points,
                           const ClassPair &pair, ExecPolicy policy) {
  const std::vector<double> v = log_rpr_batch(net1, net2, points, pair, policy);
  SampleOracleResult r;
  r.num_samples = v.size();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const auto kmin = static_cast<std::size_t>(lo - v.begin());
  const auto kmax = static_cast<std::size_t>(hi - v.begin());
  r.sampled_min = *lo;
  r.sampled_max = *hi;
  const auto pmin = points.point(kmin), pmax = points.point(kmax);
  r.argmin.assign(pmin.begin(), pmin.end());
  r.argmax.assign(pmax.begin(), pmax.end());
  return r;
}

std::vector<double> uniform_vector(Rng &rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double &x : v)
    x = rng.uniform(-scale, scale);
  return v;
}

} // namespace

PointBatch region_points(const InputRegion &region, std::size_t n, std::uint64_t seed) {
  const Box box = region_box(region);
  const std::size_t d = box.size();
  PointBatch batch;
  batch.dim = d;
  std::vector<double> x(d);
  for (std::size_t k = 0; k < d; ++k)
    x[k] = std::clamp(region.center[k], box.low[k], box.high[k]);
  batch.push_back(x);
  if (d <= kMaxCornerDim) {
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
      for (std::size_t k = 0; k < d; ++k)
        x[k] = (mask >> k) & 1 ? box.high[k] : box.low[k];
      batch.push_back(x);
    }
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> strata(d, std::vector<std::size_t>(n));
  for (auto &perm : strata) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    for (std::size_t k = n; k > 1; --k)
      std::swap(perm[k - 1], perm[rng.index(0, k - 1)]);
  }
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t k = 0; k < d; ++k) {
      const double u = (static_cast<double>(strata[k][s]) + rng.uniform01()) / static_cast<double>(n);
      x[k] = std::min(box.high[k], box.low[k] + u * (box.high[k] - box.low[k]));
    }
    batch.push_back(x);
  }
  return batch;
}

PointBatch grid_points(const InputRegion &region, std::size_t points_per_dim) {
  const Box box = region_box(region);
  const std::size_t d = box.size();
  if (d > kMaxGridDim)
    throw ArgumentError("grid oracle supports at most " + std::to_string(kMaxGridDim) +
                        " input dimensions; use sample_extrema for " + std::to_string(d));
  if (points_per_dim == 0)
    throw ArgumentError("grid needs at least one point per dimension");
  std::vector<std::vector<double>> axes(d);
  for (std::size_t k = 0; k < d; ++k) {
    if (box.low[k] == box.high[k] || points_per_dim == 1) {
      axes[k] = {box.low[k] == box.high[k] ? box.low[k] : 0.5 * (box.low[k] + box.high[k])};
      continue;
    }
    for (std::size_t s = 0; s < points_per_dim; ++s)
      axes[k].push_back(s + 1 == points_per_dim
                            ? box.high[k]
                            : box.low[k] + (box.high[k] - box.low[k]) * static_cast<double>(s) /
                                               static_cast<double>(points_per_dim - 1));
  }
  PointBatch batch;
  batch.dim = d;
  std::vector<std::size_t> at(d, 0);
  std::vector<double> x(d);
  while (true) {
    for (std::size_t k = 0; k < d; ++k)
      x[k] = axes[k][at[k]];
    batch.push_back(x);
    std::size_t k = 0;
    while (k < d && ++at[k] == axes[k].size())
      at[k++] = 0;
    if (k == d)
      break;
  }
  return batch;
}

SampleOracleResult sample_extrema(const Network &net1, const Network &net2,
                                  const InputRegion &region, const ClassPair &pair,
                                  std::size_t n, std::uint64_t seed, ExecPolicy policy) {
  if (n == 0)
    throw ArgumentError("sample_extrema needs at least one sample");
  SampleOracleResult r = extrema(net1, net2, region_points(region, n, seed), pair, policy);
  r.seed = seed;
  return r;
}

SampleOracleResult grid_extrema(const Network &net1, const Network &net2,
                                const InputRegion &region, const ClassPair &pair,
                                std::size_t points_per_dim, ExecPolicy policy) {
  return extrema(net1, net2, grid_points(region, points_per_dim), pair, policy);
}

const char *to_string(FixtureKind kind) {
  switch (kind) {
  case FixtureKind::Figure1Style:
    return "figure1";
  case FixtureKind::RandomSmall:
    return "random_small";
  case FixtureKind::UniformConstant:
    return "uniform_constant";
  }
  return "?";
}

Network random_small_network(Rng &rng, std::size_t inputs, std::size_t classes,
                             const std::string &name) {
  const std::size_t dense_layers = rng.index(2, 3);
  NetworkBuilder b({inputs});
  std::size_t width = inputs;
  for (std::size_t l = 0; l < dense_layers; ++l) {
    const bool last = l + 1 == dense_layers;
    const std::size_t rows = last ? classes : rng.index(2, 8);
    b.dense(rows, uniform_vector(rng, rows * width, 1.0), uniform_vector(rng, rows, 0.5));
    if (!last)
      b.relu();
    width = rows;
  }
  return b.build(name);
}

Network perturb_network(const Network &net, Rng &rng, double scale, const std::string &name) {
  std::vector<LayerSpec> layers = net.layers();
  for (auto &layer : layers) {
    for (double &w : layer.weights)
      w += rng.uniform(-scale, scale);
    for (double &v : layer.bias)
      v += rng.uniform(-scale, scale);
  }
  return Network(name, std::move(layers));
}

Network uniform_constant_like(const Network &net) {
  std::vector<LayerSpec> layers = net.layers();
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    if (it->kind == LayerKind::Dense) {
      std::fill(it->weights.begin(), it->weights.end(), 0.0);
      std::fill(it->bias.begin(), it->bias.end(), 0.0);
      return Network(net.name() + "_uniform", std::move(layers));
    }
  }
  throw ArgumentError("network '" + net.name() + "' has no dense layer");
}

Fixture make_fixture(FixtureKind kind, std::uint64_t seed) {
  if (kind == FixtureKind::Figure1Style) {
    auto make = [](double out_bias, const char *name) {
      return NetworkBuilder({2})
          .dense(3, {1, 0, 0, 1, 1, -1}, {0, 0, 0})
          .relu()
          .dense(2, {1, -1, 0.5, 0, 0, 0}, {out_bias, 0})
          .build(name);
    };
    return {make(0.3, "figure1_blue"), make(0.0, "figure1_red"), {0.6, 0.4}, 0.15, 0};
  }

  Rng rng(seed);
  const std::size_t inputs = rng.index(2, 4);
  const std::size_t classes = rng.index(2, 3);
  Network net1 = random_small_network(rng, inputs, classes, "random_" + std::to_string(seed));
  Network net2 = perturb_network(net1, rng, 0.1, "random_" + std::to_string(seed) + "_perturbed");
  if (kind == FixtureKind::UniformConstant)
    net2 = uniform_constant_like(net2);
  std::vector<double> center = uniform_vector(rng, inputs, 1.0);
  const std::size_t label = predict(net1, center);
  return {std::move(net1), std::move(net2), std::move(center), 0.05, label};
}

Triple random_triple(std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const std::size_t inputs = rng.index(2, 4);
  const std::size_t classes = rng.index(2, 3);
  Triple t;
  t.nets.push_back(random_small_network(rng, inputs, classes, "chain_a"));
  t.nets.push_back(perturb_network(t.nets[0], rng, 0.05, "chain_b"));
  t.nets.push_back(perturb_network(t.nets[1], rng, 0.05, "chain_c"));
  t.center = uniform_vector(rng, inputs, 1.0);
  t.label = predict(t.nets[0], t.center);
  return t;
}

} // namespace implylp

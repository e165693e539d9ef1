#pragma once

#include "implylp/bounds.hpp"
#include "implylp/kernels.hpp"
#include "implylp/model.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace implylp {

// mt19937_64 with a fixed integer-to-double mapping, so streams agree across
// standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  // Uniform in [lo, hi], both inclusive.
  std::size_t index(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform01() * static_cast<double>(hi - lo + 1));
  }

private:
  std::mt19937_64 engine_;
};

// Center, then every box corner when dim <= 12, then n Latin-hypercube points.
PointBatch region_points(const InputRegion &region, std::size_t n, std::uint64_t seed);

// Regular grid with points_per_dim points per non-degenerate coordinate.
PointBatch grid_points(const InputRegion &region, std::size_t points_per_dim);

struct SampleOracleResult {
  double sampled_min = 0.0;
  double sampled_max = 0.0;
  std::vector<double> argmin;
  std::vector<double> argmax;
  std::size_t num_samples = 0;
  std::uint64_t seed = 0;
};

SampleOracleResult sample_extrema(const Network &net1, const Network &net2,
                                  const InputRegion &region, const ClassPair &pair,
                                  std::size_t n, std::uint64_t seed,
                                  ExecPolicy policy = ExecPolicy::Parallel);

// Exhaustive grid; input dimension must be at most 4.
SampleOracleResult grid_extrema(const Network &net1, const Network &net2,
                                const InputRegion &region, const ClassPair &pair,
                                std::size_t points_per_dim,
                                ExecPolicy policy = ExecPolicy::Parallel);

enum class FixtureKind { Figure1Style, RandomSmall, UniformConstant };

const char *to_string(FixtureKind kind);

struct Fixture {
  Network net1; // implied
  Network net2; // implier
  std::vector<double> center;
  double delta = 0.0;
  std::size_t label = 0;
};

// Figure1Style: net2 is non-robust on the box yet net1 is right wherever net2
// is. RandomSmall: net2 is a perturbed copy of net1. UniformConstant: net2
// has all-zero logits.
Fixture make_fixture(FixtureKind kind, std::uint64_t seed = 0);

// Seeded dense ReLU net: 2-4 inputs, 2-3 classes, 2-3 dense layers of at most 8.
Network random_small_network(Rng &rng, std::size_t inputs, std::size_t classes,
                             const std::string &name);

// Same architecture, every parameter moved by uniform(-scale, scale).
Network perturb_network(const Network &net, Rng &rng, double scale, const std::string &name);

// Same architecture with the last dense layer zeroed.
Network uniform_constant_like(const Network &net);

// Three compatible nets sharing one input region.
struct Triple {
  std::vector<Network> nets;
  std::vector<double> center;
  std::size_t label = 0;
};
Triple random_triple(std::uint64_t seed);

} // namespace implylp

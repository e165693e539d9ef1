#pragma once

#include "implylp/kernels.hpp"
#include "implylp/lpsolve.hpp"
#include "implylp/model.hpp"

#include <optional>
#include <vector>

namespace implylp {

// l-infinity ball around `center`, optionally clipped to a global domain box.
struct InputRegion {
  std::vector<double> center;
  double delta = 0.0;
  std::optional<std::vector<double>> domain_low;
  std::optional<std::vector<double>> domain_high;
};

struct Box {
  std::vector<double> low;
  std::vector<double> high;

  std::size_t size() const { return low.size(); }
};

// [max(center - delta, domain_low), min(center + delta, domain_high)].
// Throws RegionError for an empty or malformed region.
Box region_box(const InputRegion &region);

// Bounds for one layer. For Relu and MaxPool2D layers `pre` bounds the layer
// input; for linear layers `pre` and `post` both bound the affine output.
struct LayerBounds {
  std::vector<double> pre_low, pre_high;
  std::vector<double> post_low, post_high;
};

struct BoundsMap {
  Box input;
  std::vector<LayerBounds> layers;

  // Bounds on the input of layer k (the region box for k == 0).
  std::span<const double> input_low(std::size_t k) const;
  std::span<const double> input_high(std::size_t k) const;
};

enum class NeuronPhase { Active, Inactive, Unstable };

// Guard added on both sides of a pre-activation interval before deciding its
// phase, so rounding never turns an unstable neuron into a fixed one.
inline constexpr double kPhaseSlack = 1e-9;

NeuronPhase classify_phase(double pre_low, double pre_high, double slack = kPhaseSlack);

BoundsMap propagate_intervals(const Network &net, const Box &box,
                              ExecPolicy policy = ExecPolicy::Parallel);
BoundsMap propagate_intervals(const Network &net, const InputRegion &region,
                              ExecPolicy policy = ExecPolicy::Parallel);

struct RefineDiagnostics {
  std::size_t lp_solves = 0;
  std::size_t fallbacks = 0; // neurons that kept their coarse bound
};

// Tightens the pre-activation bounds feeding every Relu / MaxPool layer by
// minimizing and maximizing each neuron over the relaxed program of the
// layers before it. The result is contained in `coarse`.
BoundsMap refine_bounds_lp(const Network &net, const InputRegion &region, const BoundsMap &coarse,
                           RefineDiagnostics *diagnostics = nullptr,
                           const SolveOptions &solve_opts = {});

// Every interval of `inner` lies in the matching interval of `outer` (+tol).
bool bounds_contained(const BoundsMap &inner, const BoundsMap &outer, double tol = 0.0);

// True values of `trace` lie inside `bounds` up to tol.
bool trace_within(const Network &net, const ForwardTrace &trace, const BoundsMap &bounds,
                  double tol);

} // namespace implylp

#include "implylp/bounds.hpp"

#include "implylp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace implylp {

Box region_box(const InputRegion &region) {
  const std::size_t n = region.center.size();
  if (n == 0)
    throw RegionError("region has an empty center");
  if (!(region.delta >= 0.0) || !std::isfinite(region.delta))
    throw RegionError("region radius must be a finite non-negative number");
  for (double c : region.center)
    if (!std::isfinite(c))
      throw RegionError("region center is not finite");
  if ((region.domain_low && region.domain_low->size() != n) ||
      (region.domain_high && region.domain_high->size() != n))
    throw RegionError("domain bounds do not match the center dimension");

  Box box;
  box.low.resize(n);
  box.high.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    double lo = region.center[k] - region.delta;
    double hi = region.center[k] + region.delta;
    if (region.domain_low) {
      if (region.center[k] < (*region.domain_low)[k])
        throw RegionError("center coordinate " + std::to_string(k) + " lies below the domain");
      lo = std::max(lo, (*region.domain_low)[k]);
    }
    if (region.domain_high) {
      if (region.center[k] > (*region.domain_high)[k])
        throw RegionError("center coordinate " + std::to_string(k) + " lies above the domain");
      hi = std::min(hi, (*region.domain_high)[k]);
    }
    if (lo > hi)
      throw RegionError("region is empty in coordinate " + std::to_string(k));
    box.low[k] = lo;
    box.high[k] = hi;
  }
  return box;
}

std::span<const double> BoundsMap::input_low(std::size_t k) const {
  return k == 0 ? std::span<const double>(input.low) : std::span<const double>(layers[k - 1].post_low);
}

std::span<const double> BoundsMap::input_high(std::size_t k) const {
  return k == 0 ? std::span<const double>(input.high)
                : std::span<const double>(layers[k - 1].post_high);
}

NeuronPhase classify_phase(double pre_low, double pre_high, double slack) {
  const double lo = pre_low - slack;
  const double hi = pre_high + slack;
  if (lo >= 0.0)
    return NeuronPhase::Active;
  if (hi <= 0.0)
    return NeuronPhase::Inactive;
  return NeuronPhase::Unstable;
}

BoundsMap propagate_intervals(const Network &net, const Box &box, ExecPolicy policy) {
  if (box.size() != net.input_size())
    throw ShapeError("region has " + std::to_string(box.size()) + " dimensions, network '" +
                     net.name() + "' takes " + std::to_string(net.input_size()));
  BoundsMap bounds;
  bounds.input = box;
  bounds.layers.reserve(net.num_layers());
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const LayerSpec &layer = net.layer(k);
    const auto in_lo = bounds.input_low(k);
    const auto in_hi = bounds.input_high(k);
    const std::size_t n = flat_size(layer.output_shape);
    LayerBounds lb;
    lb.post_low.resize(n);
    lb.post_high.resize(n);
    switch (layer.kind) {
    case LayerKind::Relu:
      lb.pre_low.assign(in_lo.begin(), in_lo.end());
      lb.pre_high.assign(in_hi.begin(), in_hi.end());
      for (std::size_t i = 0; i < n; ++i) {
        lb.post_low[i] = std::max(0.0, in_lo[i]);
        lb.post_high[i] = std::max(0.0, in_hi[i]);
      }
      break;
    case LayerKind::MaxPool2D:
      lb.pre_low.assign(in_lo.begin(), in_lo.end());
      lb.pre_high.assign(in_hi.begin(), in_hi.end());
      for (std::size_t o = 0; o < n; ++o) {
        double l = -std::numeric_limits<double>::infinity(), h = l;
        for (std::size_t idx : pool_window(layer, o)) {
          l = std::max(l, in_lo[idx]);
          h = std::max(h, in_hi[idx]);
        }
        lb.post_low[o] = l;
        lb.post_high[o] = h;
      }
      break;
    default:
      interval_affine(linear_map(layer), in_lo, in_hi, lb.post_low, lb.post_high, policy);
      lb.pre_low = lb.post_low;
      lb.pre_high = lb.post_high;
      break;
    }
    bounds.layers.push_back(std::move(lb));
  }
  return bounds;
}

BoundsMap propagate_intervals(const Network &net, const InputRegion &region, ExecPolicy policy) {
  return propagate_intervals(net, region_box(region), policy);
}

namespace {

bool within(std::span<const double> lo_in, std::span<const double> hi_in,
            std::span<const double> lo_out, std::span<const double> hi_out, double tol) {
  if (lo_in.size() != lo_out.size())
    return false;
  for (std::size_t i = 0; i < lo_in.size(); ++i)
    if (lo_in[i] < lo_out[i] - tol || hi_in[i] > hi_out[i] + tol)
      return false;
  return true;
}

} // namespace

bool bounds_contained(const BoundsMap &inner, const BoundsMap &outer, double tol) {
  if (inner.layers.size() != outer.layers.size())
    return false;
  if (!within(inner.input.low, inner.input.high, outer.input.low, outer.input.high, tol))
    return false;
  for (std::size_t k = 0; k < inner.layers.size(); ++k) {
    const auto &a = inner.layers[k];
    const auto &b = outer.layers[k];
    if (!within(a.pre_low, a.pre_high, b.pre_low, b.pre_high, tol) ||
        !within(a.post_low, a.post_high, b.post_low, b.post_high, tol))
      return false;
  }
  return true;
}

bool trace_within(const Network &net, const ForwardTrace &trace, const BoundsMap &bounds,
                  double tol) {
  auto inside = [tol](std::span<const double> v, std::span<const double> lo,
                      std::span<const double> hi) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] < lo[i] - tol || v[i] > hi[i] + tol)
        return false;
    return true;
  };
  if (!inside(trace.input, bounds.input.low, bounds.input.high))
    return false;
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    const auto &lb = bounds.layers[k];
    std::span<const double> pre = trace.values[k];
    if (!net.layer(k).is_linear())
      pre = k == 0 ? std::span<const double>(trace.input) : std::span<const double>(trace.values[k - 1]);
    if (!inside(pre, lb.pre_low, lb.pre_high) ||
        !inside(trace.values[k], lb.post_low, lb.post_high))
      return false;
  }
  return true;
}

} // namespace implylp

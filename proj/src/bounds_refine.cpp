#include "implylp/bounds.hpp"

#include "implylp/error.hpp"
#include "implylp/relax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace implylp {

namespace {

// Added to every LP optimum before it is used as a bound.
constexpr double kRefineMargin = 1e-7;

void intersect(std::vector<double> &lo, std::vector<double> &hi, std::span<const double> clo,
               std::span<const double> chi) {
  for (std::size_t i = 0; i < lo.size(); ++i) {
    lo[i] = std::max(lo[i], clo[i]);
    hi[i] = std::min(hi[i], chi[i]);
    if (lo[i] > hi[i]) // only by rounding; keep the coarse interval
      lo[i] = clo[i], hi[i] = chi[i];
  }
}

} // namespace

BoundsMap refine_bounds_lp(const Network &net, const InputRegion &region, const BoundsMap &coarse,
                           RefineDiagnostics *diagnostics, const SolveOptions &solve_opts) {
  const Box box = region_box(region);
  if (box.low != coarse.input.low || box.high != coarse.input.high)
    throw ArgumentError("coarse bounds were computed for a different region");
  if (coarse.layers.size() != net.num_layers())
    throw ArgumentError("coarse bounds do not match network '" + net.name() + "'");

  RefineDiagnostics diag;
  BoundsMap refined;
  refined.input = box;
  refined.layers.reserve(net.num_layers());

  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const LayerSpec &layer = net.layer(k);
    const LayerBounds &cb = coarse.layers[k];
    const auto in_lo = refined.input_low(k);
    const auto in_hi = refined.input_high(k);
    const std::size_t n = flat_size(layer.output_shape);
    LayerBounds lb;
    lb.post_low.resize(n);
    lb.post_high.resize(n);

    if (layer.kind == LayerKind::Relu) {
      lb.pre_low.assign(in_lo.begin(), in_lo.end());
      lb.pre_high.assign(in_hi.begin(), in_hi.end());
      for (std::size_t i = 0; i < n; ++i) {
        lb.post_low[i] = std::max(0.0, in_lo[i]);
        lb.post_high[i] = std::max(0.0, in_hi[i]);
      }
      intersect(lb.post_low, lb.post_high, cb.post_low, cb.post_high);
    } else if (layer.kind == LayerKind::MaxPool2D) {
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
      intersect(lb.post_low, lb.post_high, cb.post_low, cb.post_high);
    } else {
      interval_affine(linear_map(layer), in_lo, in_hi, lb.post_low, lb.post_high,
                      ExecPolicy::Serial);
      intersect(lb.post_low, lb.post_high, cb.post_low, cb.post_high);

      const bool feeds_nonlinear = k + 1 < net.num_layers() && !net.layer(k + 1).is_linear();
      if (k > 0 && feeds_nonlinear) {
        // Layers [0, k) use the refined bounds, layer k its interval box.
        BoundsMap partial = refined;
        partial.layers.push_back(lb);
        LinearProgram lp;
        const auto inputs = add_input_block(lp, box);
        const NetworkBlock block = add_network_block(lp, net, partial, inputs, 1, k + 1);
        const auto &cols = block.layer_vars.back();
        for (std::size_t i = 0; i < n; ++i) {
          for (double sense : {1.0, -1.0}) {
            std::fill(lp.objective.begin(), lp.objective.end(), 0.0);
            lp.objective[cols[i]] = sense;
            const LpSolution sol = solve(lp, solve_opts);
            ++diag.lp_solves;
            if (!sol.optimal()) {
              ++diag.fallbacks;
              continue;
            }
            const double v = sense * sol.objective;
            const double margin = kRefineMargin * (1.0 + std::abs(v));
            if (sense > 0.0)
              lb.post_low[i] = std::max(lb.post_low[i], v - margin);
            else
              lb.post_high[i] = std::min(lb.post_high[i], v + margin);
          }
          if (lb.post_low[i] > lb.post_high[i]) {
            lb.post_low[i] = cb.post_low[i];
            lb.post_high[i] = cb.post_high[i];
          }
        }
      }
      lb.pre_low = lb.post_low;
      lb.pre_high = lb.post_high;
    }
    refined.layers.push_back(std::move(lb));
  }
  if (diagnostics)
    *diagnostics = diag;
  return refined;
}

} // namespace implylp

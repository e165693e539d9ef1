#include "implylp/kernels.hpp"

namespace implylp::kernels {

void interval_affine_serial(const LinearMap &map, std::span<const double> lo,
                            std::span<const double> hi, std::span<double> out_lo,
                            std::span<double> out_hi) {
  for (std::size_t r = 0; r < map.rows; ++r) {
    double l = map.bias[r], h = map.bias[r];
    for (std::size_t e = map.row_start[r]; e < map.row_start[r + 1]; ++e) {
      const double w = map.value[e];
      const std::size_t c = map.col_index[e];
      if (w >= 0.0) {
        l += w * lo[c];
        h += w * hi[c];
      } else {
        l += w * hi[c];
        h += w * lo[c];
      }
    }
    out_lo[r] = l;
    out_hi[r] = h;
  }
}

std::vector<double> log_rpr_batch_serial(const Network &net1, const Network &net2,
                                         const PointBatch &points, const ClassPair &pair) {
  std::vector<double> out(points.count());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const auto x = forward(net1, points.point(k));
    const auto y = forward(net2, points.point(k));
    out[k] = (x[pair.i] - x[pair.j]) - (y[pair.i] - y[pair.j]);
  }
  return out;
}

std::size_t count_decision_violations_serial(const Network &net1, const Network &net2,
                                             const PointBatch &points, std::size_t label) {
  std::size_t count = 0;
  for (std::size_t k = 0; k < points.count(); ++k) {
    if (argmax(forward(net2, points.point(k))) != label)
      continue;
    if (argmax(forward(net1, points.point(k))) != label)
      ++count;
  }
  return count;
}

} // namespace implylp::kernels

#pragma once

#include "implylp/model.hpp"
#include "implylp/oracle.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace implylp::test_support {

// Plain nested-loop evaluation written against the layer definitions only,
// used as a second opinion on forward().
inline std::vector<double> reference_forward(const Network &net, std::vector<double> x) {
  for (const LayerSpec &l : net.layers()) {
    std::vector<double> y(flat_size(l.output_shape), 0.0);
    const Shape &is = l.input_shape;
    const Shape &os = l.output_shape;
    switch (l.kind) {
    case LayerKind::Dense: {
      const std::size_t cols = x.size();
      for (std::size_t r = 0; r < y.size(); ++r) {
        y[r] = l.bias[r];
        for (std::size_t c = 0; c < cols; ++c)
          y[r] += l.weights[r * cols + c] * x[c];
      }
      break;
    }
    case LayerKind::Conv2D: {
      const std::size_t ic = is[0], ih = is[1], iw = is[2];
      const std::size_t oc = os[0], oh = os[1], ow = os[2];
      const std::size_t kh = l.kernel_shape[2], kw = l.kernel_shape[3];
      for (std::size_t o = 0; o < oc; ++o)
        for (std::size_t r = 0; r < oh; ++r)
          for (std::size_t c = 0; c < ow; ++c) {
            double acc = l.bias[o];
            for (std::size_t ch = 0; ch < ic; ++ch)
              for (std::size_t a = 0; a < kh; ++a)
                for (std::size_t b = 0; b < kw; ++b)
                  acc += l.weights[((o * ic + ch) * kh + a) * kw + b] *
                         x[(ch * ih + r * l.stride[0] + a) * iw + c * l.stride[1] + b];
            y[(o * oh + r) * ow + c] = acc;
          }
      break;
    }
    case LayerKind::MaxPool2D: {
      const std::size_t ih = is[1], iw = is[2];
      for (std::size_t ch = 0; ch < os[0]; ++ch)
        for (std::size_t r = 0; r < os[1]; ++r)
          for (std::size_t c = 0; c < os[2]; ++c) {
            double m = -1e300;
            for (std::size_t a = 0; a < l.pool[0]; ++a)
              for (std::size_t b = 0; b < l.pool[1]; ++b)
                m = std::max(m, x[(ch * ih + r * l.pool[0] + a) * iw + c * l.pool[1] + b]);
            y[(ch * os[1] + r) * os[2] + c] = m;
          }
      break;
    }
    case LayerKind::ZeroPad2D: {
      const std::size_t ih = is[1], iw = is[2];
      for (std::size_t ch = 0; ch < is[0]; ++ch)
        for (std::size_t r = 0; r < ih; ++r)
          for (std::size_t c = 0; c < iw; ++c)
            y[(ch * os[1] + r + l.padding[0]) * os[2] + c + l.padding[2]] = x[(ch * ih + r) * iw + c];
      break;
    }
    case LayerKind::Flatten:
      y = x;
      break;
    case LayerKind::Relu:
      for (std::size_t i = 0; i < y.size(); ++i)
        y[i] = std::max(0.0, x[i]);
      break;
    }
    x = std::move(y);
  }
  return x;
}

inline std::vector<double> random_vector(Rng &rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double &x : v)
    x = rng.uniform(-scale, scale);
  return v;
}

// (1, 6, 6) image -> pad -> conv 2x3x3 stride 1 -> relu -> pool 2 -> flatten
// -> dense 3 -> relu -> dense `classes`.
inline Network random_conv_network(std::uint64_t seed, std::size_t classes = 3) {
  Rng rng(seed);
  NetworkBuilder b({1, 6, 6});
  b.zero_pad2d({1, 1, 1, 1});
  b.conv2d(2, 3, 3, random_vector(rng, 2 * 1 * 3 * 3, 0.6), random_vector(rng, 2, 0.2));
  b.relu();
  b.max_pool2d(2);
  b.flatten();
  const std::size_t width = flat_size(b.current_shape());
  b.dense(3, random_vector(rng, 3 * width, 0.5), random_vector(rng, 3, 0.2));
  b.relu();
  b.dense(classes, random_vector(rng, classes * 3, 1.0), random_vector(rng, classes, 0.2));
  return b.build("conv_" + std::to_string(seed));
}

inline Network random_dense_network(std::uint64_t seed) {
  Rng rng(seed);
  return random_small_network(rng, rng.index(2, 4), rng.index(2, 3), "dense_" + std::to_string(seed));
}

} // namespace implylp::test_support

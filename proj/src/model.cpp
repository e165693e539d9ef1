#include "implylp/model.hpp"

#include "implylp/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace implylp {

namespace {

std::string shape_str(const Shape &shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t k = 0; k < shape.size(); ++k)
    os << (k ? "," : "") << shape[k];
  os << ')';
  return os.str();
}

void require_image(const LayerSpec &layer) {
  if (layer.input_shape.size() != 3)
    throw ShapeError(std::string(to_string(layer.kind)) + " expects a (C,H,W) input, got " +
                     shape_str(layer.input_shape));
}

Shape infer_output_shape(const LayerSpec &layer) {
  const Shape &in = layer.input_shape;
  if (in.empty() || flat_size(in) == 0)
    throw ShapeError(std::string(to_string(layer.kind)) + " has an empty input shape");
  switch (layer.kind) {
  case LayerKind::Dense: {
    if (in.size() != 1)
      throw ShapeError("Dense expects a flat input, got " + shape_str(in));
    if (layer.kernel_shape.size() != 2 || layer.kernel_shape[1] != in[0] ||
        layer.kernel_shape[0] == 0)
      throw ShapeError("Dense weight shape does not match input " + shape_str(in));
    return {layer.kernel_shape[0]};
  }
  case LayerKind::Conv2D: {
    require_image(layer);
    const auto &ks = layer.kernel_shape;
    if (ks.size() != 4 || ks[1] != in[0] || ks[0] == 0 || ks[2] == 0 || ks[3] == 0)
      throw ShapeError("Conv2D kernel shape does not match input " + shape_str(in));
    if (layer.stride[0] == 0 || layer.stride[1] == 0)
      throw ShapeError("Conv2D stride must be positive");
    if (ks[2] > in[1] || ks[3] > in[2])
      throw ShapeError("Conv2D kernel larger than input " + shape_str(in));
    return {ks[0], (in[1] - ks[2]) / layer.stride[0] + 1, (in[2] - ks[3]) / layer.stride[1] + 1};
  }
  case LayerKind::MaxPool2D: {
    require_image(layer);
    const auto [ph, pw] = layer.pool;
    if (ph == 0 || pw == 0)
      throw ShapeError("MaxPool2D pool size must be positive");
    if (ph > in[1] || pw > in[2])
      throw ShapeError("MaxPool2D pool larger than input " + shape_str(in));
    return {in[0], in[1] / ph, in[2] / pw};
  }
  case LayerKind::ZeroPad2D: {
    require_image(layer);
    const auto &pad = layer.padding;
    return {in[0], in[1] + pad[0] + pad[1], in[2] + pad[2] + pad[3]};
  }
  case LayerKind::Flatten:
    return {flat_size(in)};
  case LayerKind::Relu:
    return in;
  }
  throw ShapeError("unknown layer kind");
}

} // namespace

const char *to_string(LayerKind kind) {
  switch (kind) {
  case LayerKind::Dense:
    return "Dense";
  case LayerKind::Conv2D:
    return "Conv2D";
  case LayerKind::MaxPool2D:
    return "MaxPool2D";
  case LayerKind::ZeroPad2D:
    return "ZeroPad2D";
  case LayerKind::Flatten:
    return "Flatten";
  case LayerKind::Relu:
    return "Relu";
  }
  return "?";
}

LayerKind layer_kind_from_string(const std::string &name) {
  for (auto kind : {LayerKind::Dense, LayerKind::Conv2D, LayerKind::MaxPool2D,
                    LayerKind::ZeroPad2D, LayerKind::Flatten, LayerKind::Relu})
    if (name == to_string(kind))
      return kind;
  throw ArgumentError("unknown layer kind '" + name + "'");
}

std::size_t flat_size(const Shape &shape) {
  if (shape.empty())
    return 0;
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

LayerSpec LayerSpec::dense(std::size_t rows, std::size_t cols, std::vector<double> weights,
                           std::vector<double> bias) {
  LayerSpec l;
  l.kind = LayerKind::Dense;
  l.kernel_shape = {rows, cols};
  l.weights = std::move(weights);
  l.bias = std::move(bias);
  l.input_shape = {cols};
  validate_layer(l);
  l.output_shape = infer_output_shape(l);
  return l;
}

LayerSpec LayerSpec::conv2d(const Shape &input_shape, std::size_t out_channels, std::size_t kh,
                            std::size_t kw, std::vector<double> weights, std::vector<double> bias,
                            std::array<std::size_t, 2> stride) {
  LayerSpec l;
  l.kind = LayerKind::Conv2D;
  l.input_shape = input_shape;
  l.kernel_shape = {out_channels, input_shape.empty() ? 0 : input_shape[0], kh, kw};
  l.weights = std::move(weights);
  l.bias = std::move(bias);
  l.stride = stride;
  validate_layer(l);
  l.output_shape = infer_output_shape(l);
  return l;
}

LayerSpec LayerSpec::max_pool2d(const Shape &input_shape, std::size_t pool_size) {
  return max_pool2d(input_shape, {pool_size, pool_size});
}

LayerSpec LayerSpec::max_pool2d(const Shape &input_shape, std::array<std::size_t, 2> pool) {
  LayerSpec l;
  l.kind = LayerKind::MaxPool2D;
  l.input_shape = input_shape;
  l.pool = pool;
  l.output_shape = infer_output_shape(l);
  return l;
}

LayerSpec LayerSpec::zero_pad2d(const Shape &input_shape, std::array<std::size_t, 4> padding) {
  LayerSpec l;
  l.kind = LayerKind::ZeroPad2D;
  l.input_shape = input_shape;
  l.padding = padding;
  l.output_shape = infer_output_shape(l);
  return l;
}

LayerSpec LayerSpec::flatten(const Shape &input_shape) {
  LayerSpec l;
  l.kind = LayerKind::Flatten;
  l.input_shape = input_shape;
  l.output_shape = infer_output_shape(l);
  return l;
}

LayerSpec LayerSpec::relu(const Shape &shape) {
  LayerSpec l;
  l.kind = LayerKind::Relu;
  l.input_shape = shape;
  l.output_shape = infer_output_shape(l);
  return l;
}

void validate_layer(const LayerSpec &layer) {
  const Shape expected = infer_output_shape(layer);
  if (!layer.output_shape.empty() && layer.output_shape != expected)
    throw ShapeError(std::string(to_string(layer.kind)) + " declares output shape " +
                     shape_str(layer.output_shape) + " but parameters give " +
                     shape_str(expected));
  if (layer.has_parameters()) {
    if (layer.weights.size() != flat_size(layer.kernel_shape))
      throw ShapeError(std::string(to_string(layer.kind)) + " weights have " +
                       std::to_string(layer.weights.size()) + " entries, expected " +
                       std::to_string(flat_size(layer.kernel_shape)));
    if (layer.bias.size() != layer.kernel_shape[0])
      throw ShapeError(std::string(to_string(layer.kind)) + " bias has " +
                       std::to_string(layer.bias.size()) + " entries, expected " +
                       std::to_string(layer.kernel_shape[0]));
  } else if (!layer.weights.empty() || !layer.bias.empty()) {
    throw ShapeError(std::string(to_string(layer.kind)) + " carries no parameters");
  }
}

Network::Network(std::string name, std::vector<LayerSpec> layers)
    : name_(std::move(name)), layers_(std::move(layers)) {
  if (layers_.empty())
    throw ShapeError("network '" + name_ + "' has no layers");
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    auto &layer = layers_[k];
    try {
      validate_layer(layer);
    } catch (const ShapeError &e) {
      throw ShapeError("layer " + std::to_string(k) + ": " + e.what());
    }
    if (layer.output_shape.empty())
      layer.output_shape = infer_output_shape(layer);
    if (k > 0 && layers_[k - 1].output_shape != layer.input_shape)
      throw ShapeError("layer " + std::to_string(k) + " input " + shape_str(layer.input_shape) +
                       " does not match previous output " +
                       shape_str(layers_[k - 1].output_shape));
  }
  if (output_size() == 0)
    throw ShapeError("network '" + name_ + "' has no outputs");
}

NetworkBuilder::NetworkBuilder(Shape input_shape) : shape_(std::move(input_shape)) {}

NetworkBuilder &NetworkBuilder::dense(std::size_t rows, std::vector<double> weights,
                                      std::vector<double> bias) {
  if (shape_.size() != 1)
    throw ShapeError("Dense needs a flat input; add flatten() first");
  layers_.push_back(LayerSpec::dense(rows, shape_[0], std::move(weights), std::move(bias)));
  shape_ = layers_.back().output_shape;
  return *this;
}

NetworkBuilder &NetworkBuilder::conv2d(std::size_t out_channels, std::size_t kh, std::size_t kw,
                                       std::vector<double> weights, std::vector<double> bias,
                                       std::array<std::size_t, 2> stride) {
  layers_.push_back(
      LayerSpec::conv2d(shape_, out_channels, kh, kw, std::move(weights), std::move(bias), stride));
  shape_ = layers_.back().output_shape;
  return *this;
}

NetworkBuilder &NetworkBuilder::max_pool2d(std::size_t pool_size) {
  return max_pool2d({pool_size, pool_size});
}

NetworkBuilder &NetworkBuilder::max_pool2d(std::array<std::size_t, 2> pool) {
  layers_.push_back(LayerSpec::max_pool2d(shape_, pool));
  shape_ = layers_.back().output_shape;
  return *this;
}

NetworkBuilder &NetworkBuilder::zero_pad2d(std::array<std::size_t, 4> padding) {
  layers_.push_back(LayerSpec::zero_pad2d(shape_, padding));
  shape_ = layers_.back().output_shape;
  return *this;
}

NetworkBuilder &NetworkBuilder::flatten() {
  layers_.push_back(LayerSpec::flatten(shape_));
  shape_ = layers_.back().output_shape;
  return *this;
}

NetworkBuilder &NetworkBuilder::relu() {
  layers_.push_back(LayerSpec::relu(shape_));
  return *this;
}

Network NetworkBuilder::build(std::string name) const { return Network(std::move(name), layers_); }

void validate_pair(const ClassPair &pair, std::size_t num_classes) {
  if (pair.i >= num_classes || pair.j >= num_classes)
    throw ArgumentError("class pair (" + std::to_string(pair.i) + "," + std::to_string(pair.j) +
                        ") out of range for " + std::to_string(num_classes) + " classes");
  if (pair.i == pair.j)
    throw ArgumentError("class pair needs two distinct classes");
}

LinearMap linear_map(const LayerSpec &layer) {
  LinearMap m;
  m.rows = flat_size(layer.output_shape);
  m.cols = flat_size(layer.input_shape);
  m.row_start.reserve(m.rows + 1);
  m.row_start.push_back(0);
  m.bias.assign(m.rows, 0.0);

  auto end_row = [&m] { m.row_start.push_back(m.col_index.size()); };

  switch (layer.kind) {
  case LayerKind::Dense:
    for (std::size_t r = 0; r < m.rows; ++r) {
      for (std::size_t c = 0; c < m.cols; ++c) {
        m.col_index.push_back(c);
        m.value.push_back(layer.weights[r * m.cols + c]);
      }
      m.bias[r] = layer.bias[r];
      end_row();
    }
    break;
  case LayerKind::Conv2D: {
    const std::size_t in_c = layer.input_shape[0], in_h = layer.input_shape[1],
                      in_w = layer.input_shape[2];
    const std::size_t out_c = layer.output_shape[0], out_h = layer.output_shape[1],
                      out_w = layer.output_shape[2];
    const std::size_t kh = layer.kernel_shape[2], kw = layer.kernel_shape[3];
    for (std::size_t o = 0; o < out_c; ++o)
      for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x) {
          for (std::size_t c = 0; c < in_c; ++c)
            for (std::size_t a = 0; a < kh; ++a)
              for (std::size_t b = 0; b < kw; ++b) {
                const std::size_t iy = y * layer.stride[0] + a;
                const std::size_t ix = x * layer.stride[1] + b;
                m.col_index.push_back((c * in_h + iy) * in_w + ix);
                m.value.push_back(layer.weights[((o * in_c + c) * kh + a) * kw + b]);
              }
          m.bias[(o * out_h + y) * out_w + x] = layer.bias[o];
          end_row();
        }
    break;
  }
  case LayerKind::ZeroPad2D: {
    const std::size_t in_h = layer.input_shape[1], in_w = layer.input_shape[2];
    const std::size_t out_c = layer.output_shape[0], out_h = layer.output_shape[1],
                      out_w = layer.output_shape[2];
    const std::size_t top = layer.padding[0], left = layer.padding[2];
    for (std::size_t c = 0; c < out_c; ++c)
      for (std::size_t y = 0; y < out_h; ++y)
        for (std::size_t x = 0; x < out_w; ++x) {
          if (y >= top && y - top < in_h && x >= left && x - left < in_w) {
            m.col_index.push_back((c * in_h + (y - top)) * in_w + (x - left));
            m.value.push_back(1.0);
          }
          end_row();
        }
    break;
  }
  case LayerKind::Flatten:
    for (std::size_t r = 0; r < m.rows; ++r) {
      m.col_index.push_back(r);
      m.value.push_back(1.0);
      end_row();
    }
    break;
  case LayerKind::MaxPool2D:
  case LayerKind::Relu:
    throw ArgumentError(std::string(to_string(layer.kind)) + " is not a linear layer");
  }
  return m;
}

std::vector<std::size_t> pool_window(const LayerSpec &layer, std::size_t out) {
  const std::size_t in_h = layer.input_shape[1], in_w = layer.input_shape[2];
  const std::size_t out_h = layer.output_shape[1], out_w = layer.output_shape[2];
  const auto [ph, pw] = layer.pool;
  const std::size_t c = out / (out_h * out_w);
  const std::size_t y = (out / out_w) % out_h;
  const std::size_t x = out % out_w;
  std::vector<std::size_t> window;
  window.reserve(ph * pw);
  for (std::size_t a = 0; a < ph; ++a)
    for (std::size_t b = 0; b < pw; ++b)
      window.push_back((c * in_h + y * ph + a) * in_w + x * pw + b);
  return window;
}

void apply_layer(const LayerSpec &layer, std::span<const double> in, std::span<double> out) {
  switch (layer.kind) {
  case LayerKind::Dense: {
    const std::size_t rows = layer.kernel_shape[0], cols = layer.kernel_shape[1];
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = layer.bias[r];
      const double *w = layer.weights.data() + r * cols;
      for (std::size_t c = 0; c < cols; ++c)
        acc += w[c] * in[c];
      out[r] = acc;
    }
    return;
  }
  case LayerKind::Relu:
    for (std::size_t k = 0; k < out.size(); ++k)
      out[k] = in[k] > 0.0 ? in[k] : 0.0;
    return;
  case LayerKind::Flatten:
    std::copy(in.begin(), in.end(), out.begin());
    return;
  case LayerKind::MaxPool2D:
    for (std::size_t o = 0; o < out.size(); ++o) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t idx : pool_window(layer, o))
        best = std::max(best, in[idx]);
      out[o] = best;
    }
    return;
  case LayerKind::Conv2D:
  case LayerKind::ZeroPad2D: {
    const LinearMap m = linear_map(layer);
    for (std::size_t r = 0; r < m.rows; ++r) {
      double acc = m.bias[r];
      for (std::size_t e = m.row_start[r]; e < m.row_start[r + 1]; ++e)
        acc += m.value[e] * in[m.col_index[e]];
      out[r] = acc;
    }
    return;
  }
  }
}

std::vector<double> forward(const Network &net, std::span<const double> input) {
  if (input.size() != net.input_size())
    throw ShapeError("input has " + std::to_string(input.size()) + " values, network '" +
                     net.name() + "' expects " + std::to_string(net.input_size()));
  std::vector<double> cur(input.begin(), input.end());
  std::vector<double> next;
  for (const auto &layer : net.layers()) {
    next.assign(flat_size(layer.output_shape), 0.0);
    apply_layer(layer, cur, next);
    cur.swap(next);
  }
  return cur;
}

ForwardTrace forward_trace(const Network &net, std::span<const double> input) {
  if (input.size() != net.input_size())
    throw ShapeError("input has " + std::to_string(input.size()) + " values, network '" +
                     net.name() + "' expects " + std::to_string(net.input_size()));
  ForwardTrace trace;
  trace.input.assign(input.begin(), input.end());
  trace.values.reserve(net.num_layers());
  std::span<const double> cur = trace.input;
  for (const auto &layer : net.layers()) {
    trace.values.emplace_back(flat_size(layer.output_shape), 0.0);
    apply_layer(layer, cur, trace.values.back());
    cur = trace.values.back();
  }
  return trace;
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty())
    throw NumericError("softmax of an empty vector");
  for (double v : logits)
    if (!std::isfinite(v))
      throw NumericError("softmax input is not finite");
  const double shift = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - shift);
    total += p[k];
  }
  for (double &v : p)
    v /= total;
  return p;
}

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k)
    if (values[k] > values[best])
      best = k;
  return best;
}

std::size_t predict(const Network &net, std::span<const double> input) {
  return argmax(forward(net, input));
}

double log_pr_from_logits(std::span<const double> logits, const ClassPair &pair) {
  validate_pair(pair, logits.size());
  return logits[pair.i] - logits[pair.j];
}

double log_pr(const Network &net, std::span<const double> input, const ClassPair &pair) {
  validate_pair(pair, net.output_size());
  return log_pr_from_logits(forward(net, input), pair);
}

double log_rpr(const Network &net1, const Network &net2, std::span<const double> input,
               const ClassPair &pair) {
  require_compatible(net1, net2);
  return log_pr(net1, input, pair) - log_pr(net2, input, pair);
}

bool check_compatible(const Network &net1, const Network &net2) {
  return net1.input_size() == net2.input_size() && net1.output_size() == net2.output_size();
}

void require_compatible(const Network &net1, const Network &net2) {
  if (!check_compatible(net1, net2))
    throw CompatibilityError("networks '" + net1.name() + "' (" +
                             std::to_string(net1.input_size()) + "->" +
                             std::to_string(net1.output_size()) + ") and '" + net2.name() + "' (" +
                             std::to_string(net2.input_size()) + "->" +
                             std::to_string(net2.output_size()) + ") are not compatible");
}

} // namespace implylp

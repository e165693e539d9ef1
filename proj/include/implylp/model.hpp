#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace implylp {

enum class LayerKind { Dense, Conv2D, MaxPool2D, ZeroPad2D, Flatten, Relu };

const char *to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string &name);

// Row-major tensor shape. Images are channel-first (C, H, W).
using Shape = std::vector<std::size_t>;

std::size_t flat_size(const Shape &shape);

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;

  // Dense: (rows, cols) row-major. Conv2D: (out_c, in_c, kh, kw) row-major.
  std::vector<double> weights;
  std::vector<double> bias;
  std::vector<std::size_t> kernel_shape;

  std::array<std::size_t, 2> pool{0, 0};             // MaxPool2D window (h, w) = stride
  std::array<std::size_t, 2> stride{1, 1};           // Conv2D (h, w)
  std::array<std::size_t, 4> padding{0, 0, 0, 0};    // top, bottom, left, right

  Shape input_shape;
  Shape output_shape;

  bool is_linear() const { return kind != LayerKind::Relu && kind != LayerKind::MaxPool2D; }
  bool has_parameters() const { return kind == LayerKind::Dense || kind == LayerKind::Conv2D; }

  static LayerSpec dense(std::size_t rows, std::size_t cols, std::vector<double> weights,
                         std::vector<double> bias);
  static LayerSpec conv2d(const Shape &input_shape, std::size_t out_channels, std::size_t kh,
                          std::size_t kw, std::vector<double> weights, std::vector<double> bias,
                          std::array<std::size_t, 2> stride = {1, 1});
  static LayerSpec max_pool2d(const Shape &input_shape, std::size_t pool_size);
  static LayerSpec max_pool2d(const Shape &input_shape, std::array<std::size_t, 2> pool);
  static LayerSpec zero_pad2d(const Shape &input_shape, std::array<std::size_t, 4> padding);
  static LayerSpec flatten(const Shape &input_shape);
  static LayerSpec relu(const Shape &shape);
};

// Recomputes output_shape from input_shape and the layer parameters and
// checks parameter array lengths. Throws ShapeError.
void validate_layer(const LayerSpec &layer);

// Immutable feed-forward classifier. The last layer produces logits; softmax
// is applied on demand and never stored.
class Network {
public:
  Network(std::string name, std::vector<LayerSpec> layers);

  const std::string &name() const { return name_; }
  const std::vector<LayerSpec> &layers() const { return layers_; }
  std::size_t num_layers() const { return layers_.size(); }
  const LayerSpec &layer(std::size_t k) const { return layers_.at(k); }

  const Shape &input_shape() const { return layers_.front().input_shape; }
  std::size_t input_size() const { return flat_size(input_shape()); }
  std::size_t output_size() const { return flat_size(layers_.back().output_shape); }
  std::size_t layer_size(std::size_t k) const { return flat_size(layers_.at(k).output_shape); }

private:
  std::string name_;
  std::vector<LayerSpec> layers_;
};

// Tracks the running shape so layers can be appended without restating it.
class NetworkBuilder {
public:
  explicit NetworkBuilder(Shape input_shape);

  NetworkBuilder &dense(std::size_t rows, std::vector<double> weights, std::vector<double> bias);
  NetworkBuilder &conv2d(std::size_t out_channels, std::size_t kh, std::size_t kw,
                         std::vector<double> weights, std::vector<double> bias,
                         std::array<std::size_t, 2> stride = {1, 1});
  NetworkBuilder &max_pool2d(std::size_t pool_size);
  NetworkBuilder &max_pool2d(std::array<std::size_t, 2> pool);
  NetworkBuilder &zero_pad2d(std::array<std::size_t, 4> padding);
  NetworkBuilder &flatten();
  NetworkBuilder &relu();

  const Shape &current_shape() const { return shape_; }
  Network build(std::string name) const;

private:
  Shape shape_;
  std::vector<LayerSpec> layers_;
};

struct ClassPair {
  std::size_t i = 0;
  std::size_t j = 1;

  friend bool operator==(const ClassPair &, const ClassPair &) = default;
};

// Throws ArgumentError unless i != j and both are below num_classes.
void validate_pair(const ClassPair &pair, std::size_t num_classes);

// Sparse affine map out = W * in + b of a linear layer (Dense, Conv2D,
// ZeroPad2D, Flatten) in CSR form.
struct LinearMap {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_start;
  std::vector<std::size_t> col_index;
  std::vector<double> value;
  std::vector<double> bias;
};

LinearMap linear_map(const LayerSpec &layer);

// Flat input indices feeding max-pool output neuron `out`.
std::vector<std::size_t> pool_window(const LayerSpec &layer, std::size_t out);

// Evaluates one layer; `out` must have the layer's flat output size.
void apply_layer(const LayerSpec &layer, std::span<const double> in, std::span<double> out);

std::vector<double> forward(const Network &net, std::span<const double> input);

// Output of every layer for one input; values[k] is the output of layer k.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<std::vector<double>> values;
};

ForwardTrace forward_trace(const Network &net, std::span<const double> input);

std::vector<double> softmax(std::span<const double> logits);

// Smallest index wins ties.
std::size_t argmax(std::span<const double> values);

std::size_t predict(const Network &net, std::span<const double> input);

// ln of the prediction ratio: x_i - x_j of the logits.
double log_pr(const Network &net, std::span<const double> input, const ClassPair &pair);
double log_pr_from_logits(std::span<const double> logits, const ClassPair &pair);

// ln of the relative prediction ratio of net1 w.r.t. net2 at a shared input.
double log_rpr(const Network &net1, const Network &net2, std::span<const double> input,
               const ClassPair &pair);

bool check_compatible(const Network &net1, const Network &net2);
void require_compatible(const Network &net1, const Network &net2);

} // namespace implylp

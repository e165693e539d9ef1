#pragma once

#include "implylp/model.hpp"

#include <cstddef>
#include <string>

namespace implylp {

enum class QuantKind { Float16, Int16, Int8, Int4 };

struct QuantScheme {
  QuantKind kind = QuantKind::Int8;
};

const char *to_string(QuantKind kind);
QuantKind quant_kind_from_string(const std::string &name);

// Largest representable magnitude of a symmetric integer scheme, 2^(bits-1)-1.
int quant_qmax(QuantKind kind);

// Where the magnitude-pruning threshold takes its maximum from.
enum class PruneScope {
  LayerJoint,    // max over weights and biases of the layer together
  LayerSeparate, // weights and biases thresholded against their own max
};

struct PruneOptions {
  PruneScope scope = PruneScope::LayerJoint;
};

// Zeroes every parameter with |v| < fraction * max|v| of its layer.
Network prune_mbp(const Network &net, double fraction, PruneOptions opts = {});

// Per-tensor quantize-dequantize of every weight and bias tensor.
Network quantize(const Network &net, QuantScheme scheme);

// Quantize-dequantize a single tensor in place; returns the scale used
// (0 for Float16 and for all-zero tensors).
double quantize_tensor(std::vector<double> &values, QuantKind kind);

// Nearest IEEE 754 binary16 value (ties to even), saturating at +-65504.
double round_to_half(double v);

struct ParameterStats {
  std::size_t total = 0;
  std::size_t zeros = 0;
  double sparsity() const { return total ? static_cast<double>(zeros) / total : 0.0; }
};

ParameterStats parameter_stats(const Network &net);

} // namespace implylp

#include "implylp/compaction.hpp"

#include "implylp/error.hpp"

#include <algorithm>
#include <cmath>

namespace implylp {

namespace {

double max_abs(const std::vector<double> &values) {
  double m = 0.0;
  for (double v : values)
    m = std::max(m, std::abs(v));
  return m;
}

void zero_below(std::vector<double> &values, double threshold) {
  for (double &v : values)
    if (std::abs(v) < threshold)
      v = 0.0;
}

} // namespace

const char *to_string(QuantKind kind) {
  switch (kind) {
  case QuantKind::Float16:
    return "float16";
  case QuantKind::Int16:
    return "int16";
  case QuantKind::Int8:
    return "int8";
  case QuantKind::Int4:
    return "int4";
  }
  return "?";
}

QuantKind quant_kind_from_string(const std::string &name) {
  for (auto kind : {QuantKind::Float16, QuantKind::Int16, QuantKind::Int8, QuantKind::Int4})
    if (name == to_string(kind))
      return kind;
  throw ArgumentError("unknown quantization scheme '" + name + "'");
}

int quant_qmax(QuantKind kind) {
  switch (kind) {
  case QuantKind::Int16:
    return (1 << 15) - 1;
  case QuantKind::Int8:
    return (1 << 7) - 1;
  case QuantKind::Int4:
    return (1 << 3) - 1;
  case QuantKind::Float16:
    break;
  }
  throw ArgumentError("float16 has no integer range");
}

Network prune_mbp(const Network &net, double fraction, PruneOptions opts) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ArgumentError("prune fraction must lie in [0, 1]");
  std::vector<LayerSpec> layers = net.layers();
  for (auto &layer : layers) {
    if (!layer.has_parameters())
      continue;
    if (opts.scope == PruneScope::LayerJoint) {
      const double threshold = fraction * std::max(max_abs(layer.weights), max_abs(layer.bias));
      zero_below(layer.weights, threshold);
      zero_below(layer.bias, threshold);
    } else {
      zero_below(layer.weights, fraction * max_abs(layer.weights));
      zero_below(layer.bias, fraction * max_abs(layer.bias));
    }
  }
  return Network(net.name(), std::move(layers));
}

double round_to_half(double v) {
  if (v == 0.0 || !std::isfinite(v))
    return v;
  constexpr double kHalfMax = 65504.0;
  constexpr double kOverflow = 65520.0; // rounds to infinity at and above this
  const double a = std::abs(v);
  if (a >= kOverflow)
    return std::copysign(kHalfMax, v);
  int e = 0;
  std::frexp(a, &e); // a = m * 2^e, m in [0.5, 1)
  const int exponent = std::max(e - 1, -14);
  const double quantum = std::ldexp(1.0, exponent - 10);
  const double r = std::nearbyint(a / quantum) * quantum;
  return std::copysign(std::min(r, kHalfMax), v);
}

double quantize_tensor(std::vector<double> &values, QuantKind kind) {
  if (kind == QuantKind::Float16) {
    for (double &v : values)
      v = round_to_half(v);
    return 0.0;
  }
  const double m = max_abs(values);
  if (m == 0.0)
    return 0.0;
  const double qmax = quant_qmax(kind);
  for (double &v : values) {
    const double q = std::clamp(std::nearbyint(v * qmax / m), -qmax, qmax);
    v = q * m / qmax;
  }
  return m / qmax;
}

Network quantize(const Network &net, QuantScheme scheme) {
  std::vector<LayerSpec> layers = net.layers();
  for (auto &layer : layers) {
    if (!layer.has_parameters())
      continue;
    quantize_tensor(layer.weights, scheme.kind);
    quantize_tensor(layer.bias, scheme.kind);
  }
  return Network(net.name(), std::move(layers));
}

ParameterStats parameter_stats(const Network &net) {
  ParameterStats s;
  for (const auto &layer : net.layers()) {
    for (const auto *tensor : {&layer.weights, &layer.bias}) {
      s.total += tensor->size();
      s.zeros += static_cast<std::size_t>(std::count(tensor->begin(), tensor->end(), 0.0));
    }
  }
  return s;
}

} // namespace implylp

#include "implylp/ingest.hpp"

#include "implylp/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace implylp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string &origin, const std::string &what) {
  throw LoadError(origin + ": " + what);
}

std::string layer_ctx(std::size_t k, const std::string &field) {
  return "layer " + std::to_string(k) + " field '" + field + "'";
}

std::vector<double> read_reals(const json &node, const std::string &origin,
                               const std::string &ctx) {
  if (!node.is_array())
    fail(origin, ctx + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t k = 0; k < node.size(); ++k) {
    const json &v = node[k];
    if (!v.is_number())
      fail(origin, ctx + " entry " + std::to_string(k) + " is not a finite number");
    const double d = v.get<double>();
    if (!std::isfinite(d))
      fail(origin, ctx + " entry " + std::to_string(k) + " is not a finite number");
    out.push_back(d);
  }
  return out;
}

std::vector<std::size_t> read_dims(const json &node, const std::string &origin,
                                   const std::string &ctx) {
  if (!node.is_array())
    fail(origin, ctx + " must be an array of non-negative integers");
  std::vector<std::size_t> out;
  for (const json &v : node) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      fail(origin, ctx + " must be an array of non-negative integers");
    out.push_back(v.get<std::size_t>());
  }
  return out;
}

const json &require(const json &obj, const char *key, const std::string &origin,
                    const std::string &ctx) {
  auto it = obj.find(key);
  if (it == obj.end())
    fail(origin, ctx + " is missing");
  return *it;
}

void require_version(const json &doc, const std::string &origin) {
  auto it = doc.find("format_version");
  if (it == doc.end() || !it->is_string())
    fail(origin, "field 'format_version' is missing");
  if (it->get<std::string>() != kFormatVersion)
    fail(origin, "unsupported format_version '" + it->get<std::string>() + "'");
}

} // namespace

Network network_from_json(const json &doc, const std::string &origin) {
  if (!doc.is_object())
    fail(origin, "network file must be a JSON object");
  require_version(doc, origin);
  std::string name = doc.value("name", std::string("network"));
  const json &layers_node = require(doc, "layers", origin, "field 'layers'");
  if (!layers_node.is_array() || layers_node.empty())
    fail(origin, "field 'layers' must be a non-empty array");

  std::vector<LayerSpec> layers;
  for (std::size_t k = 0; k < layers_node.size(); ++k) {
    const json &node = layers_node[k];
    if (!node.is_object())
      fail(origin, "layer " + std::to_string(k) + " must be an object");
    LayerSpec layer;
    const json &kind = require(node, "kind", origin, layer_ctx(k, "kind"));
    if (!kind.is_string())
      fail(origin, layer_ctx(k, "kind") + " must be a string");
    try {
      layer.kind = layer_kind_from_string(kind.get<std::string>());
    } catch (const ArgumentError &e) {
      fail(origin, layer_ctx(k, "kind") + ": " + e.what());
    }
    layer.input_shape = read_dims(require(node, "input_shape", origin, layer_ctx(k, "input_shape")),
                                  origin, layer_ctx(k, "input_shape"));
    layer.output_shape =
        read_dims(require(node, "output_shape", origin, layer_ctx(k, "output_shape")), origin,
                  layer_ctx(k, "output_shape"));

    switch (layer.kind) {
    case LayerKind::Conv2D:
      if (node.contains("stride")) {
        auto s = read_dims(node["stride"], origin, layer_ctx(k, "stride"));
        if (s.size() != 2 || s[0] == 0 || s[1] == 0)
          fail(origin, layer_ctx(k, "stride") + " must hold two positive integers");
        layer.stride = {s[0], s[1]};
      }
      [[fallthrough]];
    case LayerKind::Dense: {
      layer.kernel_shape = read_dims(
          require(node, "weight_shape", origin, layer_ctx(k, "weight_shape")), origin,
          layer_ctx(k, "weight_shape"));
      layer.weights = read_reals(require(node, "weights", origin, layer_ctx(k, "weights")), origin,
                                 layer_ctx(k, "weights"));
      layer.bias = read_reals(require(node, "bias", origin, layer_ctx(k, "bias")), origin,
                              layer_ctx(k, "bias"));
      if (layer.weights.size() != flat_size(layer.kernel_shape))
        fail(origin, layer_ctx(k, "weights") + " has " + std::to_string(layer.weights.size()) +
                         " entries but weight_shape implies " +
                         std::to_string(flat_size(layer.kernel_shape)));
      if (layer.kernel_shape.empty() || layer.bias.size() != layer.kernel_shape[0])
        fail(origin, layer_ctx(k, "bias") + " length " + std::to_string(layer.bias.size()) +
                         " does not match the number of output rows");
      break;
    }
    case LayerKind::MaxPool2D: {
      const json &p = require(node, "pool_size", origin, layer_ctx(k, "pool_size"));
      if (p.is_number_integer() && p.get<long long>() > 0) {
        layer.pool = {p.get<std::size_t>(), p.get<std::size_t>()};
      } else {
        auto dims = read_dims(p, origin, layer_ctx(k, "pool_size"));
        if (dims.size() != 2 || dims[0] == 0 || dims[1] == 0)
          fail(origin, layer_ctx(k, "pool_size") + " must be a positive integer or [h, w]");
        layer.pool = {dims[0], dims[1]};
      }
      break;
    }
    case LayerKind::ZeroPad2D: {
      auto pad = read_dims(require(node, "padding", origin, layer_ctx(k, "padding")), origin,
                           layer_ctx(k, "padding"));
      if (pad.size() != 4)
        fail(origin, layer_ctx(k, "padding") + " must hold four integers");
      layer.padding = {pad[0], pad[1], pad[2], pad[3]};
      break;
    }
    case LayerKind::Flatten:
    case LayerKind::Relu:
      break;
    }
    try {
      validate_layer(layer);
    } catch (const ShapeError &e) {
      fail(origin, "layer " + std::to_string(k) + " field 'output_shape': " + e.what());
    }
    layers.push_back(std::move(layer));
  }
  try {
    return Network(std::move(name), std::move(layers));
  } catch (const ShapeError &e) {
    fail(origin, e.what());
  }
}

json network_to_json(const Network &net) {
  json layers = json::array();
  for (const auto &layer : net.layers()) {
    json node;
    node["kind"] = to_string(layer.kind);
    node["input_shape"] = layer.input_shape;
    node["output_shape"] = layer.output_shape;
    switch (layer.kind) {
    case LayerKind::Conv2D:
      node["stride"] = {layer.stride[0], layer.stride[1]};
      [[fallthrough]];
    case LayerKind::Dense:
      node["weight_shape"] = layer.kernel_shape;
      node["weights"] = layer.weights;
      node["bias"] = layer.bias;
      break;
    case LayerKind::MaxPool2D:
      node["pool_size"] = {layer.pool[0], layer.pool[1]};
      break;
    case LayerKind::ZeroPad2D:
      node["padding"] = {layer.padding[0], layer.padding[1], layer.padding[2], layer.padding[3]};
      break;
    case LayerKind::Flatten:
    case LayerKind::Relu:
      break;
    }
    layers.push_back(std::move(node));
  }
  json doc;
  doc["format_version"] = kFormatVersion;
  doc["name"] = net.name();
  doc["layers"] = std::move(layers);
  return doc;
}

json read_json_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw LoadError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error &e) {
    throw LoadError(path.string() + ": parse error: " + e.what());
  }
}

void write_text_file(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw IoError(path.string() + ": cannot open for writing");
  out << text;
  if (!out)
    throw IoError(path.string() + ": write failed");
}

Network load_network(const std::filesystem::path &path) {
  return network_from_json(read_json_file(path), path.string());
}

void save_network(const Network &net, const std::filesystem::path &path) {
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    try {
      validate_layer(net.layer(k));
    } catch (const ShapeError &e) {
      throw ShapeError("layer " + std::to_string(k) + ": " + e.what());
    }
  }
  write_text_file(path, network_to_json(net).dump(1) + "\n");
}

std::vector<Sample> samples_from_json(const json &doc, std::optional<std::size_t> num_classes,
                                      const std::string &origin) {
  if (!doc.is_object())
    fail(origin, "sample file must be a JSON object");
  const json &list = require(doc, "samples", origin, "field 'samples'");
  if (!list.is_array())
    fail(origin, "field 'samples' must be an array");
  std::vector<Sample> out;
  out.reserve(list.size());
  for (std::size_t k = 0; k < list.size(); ++k) {
    const json &node = list[k];
    if (!node.is_object())
      fail(origin, "sample " + std::to_string(k) + " must be an object");
    Sample s;
    if (node.contains("id")) {
      const json &id = node["id"];
      s.id = id.is_string() ? id.get<std::string>() : id.dump();
    } else {
      s.id = std::to_string(k);
    }
    const std::string ctx = "sample '" + s.id + "' field 'values'";
    s.values = read_reals(require(node, "values", origin, ctx), origin, ctx);
    if (node.contains("label") && !node["label"].is_null()) {
      const json &label = node["label"];
      if (!label.is_number_integer() || label.get<long long>() < 0)
        fail(origin, "sample '" + s.id + "' field 'label' must be a non-negative integer");
      s.label = label.get<std::size_t>();
      if (num_classes && *s.label >= *num_classes)
        fail(origin, "sample '" + s.id + "' label " + std::to_string(*s.label) +
                         " is out of range for " + std::to_string(*num_classes) + " classes");
    }
    out.push_back(std::move(s));
  }
  return out;
}

json samples_to_json(const std::vector<Sample> &samples) {
  json list = json::array();
  for (const auto &s : samples) {
    json node;
    node["id"] = s.id;
    node["values"] = s.values;
    if (s.label)
      node["label"] = *s.label;
    list.push_back(std::move(node));
  }
  json doc;
  doc["samples"] = std::move(list);
  return doc;
}

std::vector<Sample> load_samples(const std::filesystem::path &path,
                                 std::optional<std::size_t> num_classes) {
  return samples_from_json(read_json_file(path), num_classes, path.string());
}

void save_samples(const std::vector<Sample> &samples, const std::filesystem::path &path) {
  write_text_file(path, samples_to_json(samples).dump(1) + "\n");
}

} // namespace implylp

#pragma once

#include "implylp/model.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace implylp {

inline constexpr const char *kFormatVersion = "1";

// NetworkFile <-> Network. The JSON layout is documented in docs/formats.md.
Network network_from_json(const nlohmann::json &doc, const std::string &origin = "<memory>");
nlohmann::json network_to_json(const Network &net);

Network load_network(const std::filesystem::path &path);
void save_network(const Network &net, const std::filesystem::path &path);

struct Sample {
  std::string id;
  std::vector<double> values;
  std::optional<std::size_t> label;
};

// Order preserving. When num_classes is given, labels must be below it.
std::vector<Sample> samples_from_json(const nlohmann::json &doc,
                                      std::optional<std::size_t> num_classes = std::nullopt,
                                      const std::string &origin = "<memory>");
nlohmann::json samples_to_json(const std::vector<Sample> &samples);

std::vector<Sample> load_samples(const std::filesystem::path &path,
                                 std::optional<std::size_t> num_classes = std::nullopt);
void save_samples(const std::vector<Sample> &samples, const std::filesystem::path &path);

// Reads a whole file as JSON; LoadError names the path on failure.
nlohmann::json read_json_file(const std::filesystem::path &path);
void write_text_file(const std::filesystem::path &path, const std::string &text);

} // namespace implylp

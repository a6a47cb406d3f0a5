#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cemaint/corpus.hpp"
#include "cemaint/cross_validation.hpp"
#include "cemaint/features.hpp"

namespace cemaint::cli {

/// Settings shared by every subcommand. Keys of a JSON config file use the
/// long flag names ("max-input", "prepend-bos", ...); a flag given on the
/// command line replaces the file's value.
struct RunConfig {
  std::optional<std::filesystem::path> corpus;
  std::optional<std::filesystem::path> ratings;
  std::vector<std::filesystem::path> scores;
  std::optional<std::string> endpoint;
  std::optional<std::string> builtin;
  std::optional<std::size_t> max_input;
  bool prepend_bos = false;
  Dimension dimension = Dimension::Ov;
  FeatureSet features = FeatureSet::Both;
  Classifier classifier = Classifier::LogReg;
  bool all = false;
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  bool shuffle = false;
  ScalingMode scaling = ScalingMode::PerFold;
  std::filesystem::path out = "out";
  std::size_t concurrency = 4;
  std::optional<std::string> model_id;
  std::vector<std::string> extensions{".java"};
  std::size_t synthetic_n = 1000;
};

/// Keys accepted in a config file.
const std::vector<std::string>& config_keys();

/// Merge `file` and `flags` (flags win) into a validated config. Unknown
/// keys, wrongly typed values, folds < 2 and concurrency < 1 throw
/// ConfigError. When no endpoint is given anywhere, `env_endpoint` is used.
RunConfig resolve_config(const nlohmann::json& file, const nlohmann::json& flags,
                         std::optional<std::string> env_endpoint = std::nullopt);

nlohmann::json read_config_file(const std::filesystem::path& path);

}  // namespace cemaint::cli

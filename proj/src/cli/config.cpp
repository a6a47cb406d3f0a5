#include "cemaint/cli/config.hpp"

#include <algorithm>
#include <fstream>

namespace cemaint::cli {

using nlohmann::json;

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "corpus", "ratings", "scores",  "endpoint", "builtin",     "max-input",
      "prepend-bos", "dimension", "features", "classifier", "all",  "folds",
      "seed",   "shuffle", "scaling", "out",      "concurrency", "model-id",
      "extensions", "n"};
  return keys;
}

namespace {

template <class T>
T get(const json& value, const std::string& key) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "': unexpected value " + value.dump());
  }
}

std::size_t get_count(const json& value, const std::string& key) {
  if (!value.is_number_integer() || value.get<long long>() < 0) {
    throw ConfigError("config key '" + key + "': expected a non-negative integer, got " +
                      value.dump());
  }
  return value.get<std::size_t>();
}

std::vector<std::string> get_strings(const json& value, const std::string& key) {
  if (value.is_string()) return {value.get<std::string>()};
  return get<std::vector<std::string>>(value, key);
}

}  // namespace

RunConfig resolve_config(const json& file, const json& flags,
                         std::optional<std::string> env_endpoint) {
  json merged = json::object();
  for (const json* source : {&file, &flags}) {
    if (source->is_null()) continue;
    if (!source->is_object()) throw ConfigError("config must be a JSON object");
    for (const auto& [key, value] : source->items()) {
      const auto& keys = config_keys();
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        throw ConfigError("unknown config key '" + key + "'");
      }
      merged[key] = value;
    }
  }

  RunConfig c;
  for (const auto& [key, v] : merged.items()) {
    if (key == "corpus") c.corpus = get<std::string>(v, key);
    else if (key == "ratings") c.ratings = get<std::string>(v, key);
    else if (key == "scores") {
      for (const auto& s : get_strings(v, key)) c.scores.emplace_back(s);
    } else if (key == "endpoint") c.endpoint = get<std::string>(v, key);
    else if (key == "builtin") c.builtin = get<std::string>(v, key);
    else if (key == "max-input") c.max_input = get_count(v, key);
    else if (key == "prepend-bos") c.prepend_bos = get<bool>(v, key);
    else if (key == "dimension") {
      const auto d = parse_dimension(get<std::string>(v, key));
      if (!d) throw ConfigError("unknown dimension " + v.dump() + " (expected ov|rd|ud|cx|md)");
      c.dimension = *d;
    } else if (key == "features") {
      const auto f = parse_feature_set(get<std::string>(v, key));
      if (!f) throw ConfigError("unknown feature set " + v.dump() + " (expected lloc|ce|both)");
      c.features = *f;
    } else if (key == "classifier") {
      const auto k = parse_classifier(get<std::string>(v, key));
      if (!k) throw ConfigError("unknown classifier " + v.dump() + " (expected logreg|rf)");
      c.classifier = *k;
    } else if (key == "all") c.all = get<bool>(v, key);
    else if (key == "folds") c.folds = get_count(v, key);
    else if (key == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw ConfigError("config key 'seed': expected a non-negative integer, got " + v.dump());
      }
      c.seed = v.get<std::uint64_t>();
    } else if (key == "shuffle") c.shuffle = get<bool>(v, key);
    else if (key == "scaling") {
      const auto s = parse_scaling_mode(get<std::string>(v, key));
      if (!s) throw ConfigError("unknown scaling " + v.dump() + " (expected per-fold|global)");
      c.scaling = *s;
    } else if (key == "out") c.out = get<std::string>(v, key);
    else if (key == "concurrency") c.concurrency = get_count(v, key);
    else if (key == "model-id") c.model_id = get<std::string>(v, key);
    else if (key == "extensions") c.extensions = get_strings(v, key);
    else if (key == "n") c.synthetic_n = get_count(v, key);
  }
  if (!c.endpoint && env_endpoint && !env_endpoint->empty()) c.endpoint = env_endpoint;

  if (c.folds < 2) throw ConfigError("folds must be >= 2");
  if (c.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  if (c.max_input && *c.max_input < 2) throw ConfigError("max-input must be >= 2");
  for (auto& ext : c.extensions) {
    if (!ext.empty() && ext.front() != '.') ext.insert(ext.begin(), '.');
  }
  return c;
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
}

}  // namespace cemaint::cli

#include "cemaint/lm_backend.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cemaint/csv.hpp"

namespace cemaint {

LogprobVector LanguageModel::next_token_logprobs(const TokenSequence& tokens) const {
  if (tokens.length() < 2) {
    throw PreconditionError("next_token_logprobs needs at least 2 tokens, got " +
                            std::to_string(tokens.length()));
  }
  if (tokens.length() > spec().max_input) {
    throw PreconditionError("sequence of " + std::to_string(tokens.length()) +
                            " tokens exceeds max_input " + std::to_string(spec().max_input) +
                            "; chunk first");
  }
  LogprobVector result = compute_logprobs(tokens);
  if (result.target_count() + 1 != tokens.length()) {
    throw TransportError("model returned " + std::to_string(result.target_count()) +
                         " logprobs for " + std::to_string(tokens.length()) + " tokens");
  }
  return result;
}

// --- Builtins ---------------------------------------------------------------

BuiltinModel::BuiltinModel(std::string descriptor, std::size_t vocab_size, std::size_t max_input)
    : vocab_size_(vocab_size) {
  if (vocab_size == 0) throw ConfigError("builtin '" + descriptor + "': empty vocabulary");
  if (max_input < 2) {
    throw ConfigError("builtin '" + descriptor + "': max_input must be >= 2");
  }
  spec_.model_id = descriptor;
  spec_.max_input = max_input;
  spec_.backend = BuiltinDescriptor{std::move(descriptor)};
}

TokenSequence BuiltinModel::tokenize(std::string_view text) const {
  TokenSequence tokens;
  tokens.ids.reserve(text.size());
  for (char c : text) {
    const auto byte = static_cast<TokenId>(static_cast<unsigned char>(c));
    tokens.ids.push_back(vocab_size_ >= 256 ? byte : byte % static_cast<TokenId>(vocab_size_));
  }
  return tokens;
}

LogprobVector BuiltinModel::compute_logprobs(const TokenSequence& tokens) const {
  LogprobVector out;
  out.values.reserve(tokens.length() - 1);
  const std::span<const TokenId> ids(tokens.ids);
  for (std::size_t i = 1; i < ids.size(); ++i) {
    out.values.push_back(token_logprob(ids.first(i), ids[i]));
  }
  return out;
}

UniformModel::UniformModel(std::size_t vocab_size, std::size_t max_input)
    : BuiltinModel("uniform:" + std::to_string(vocab_size), vocab_size, max_input),
      logprob_(-std::log(static_cast<double>(vocab_size))) {}

double UniformModel::token_logprob(std::span<const TokenId>, TokenId next) const {
  if (next < 0 || static_cast<std::size_t>(next) >= vocab_size()) {
    throw PreconditionError("token id " + std::to_string(next) + " outside vocabulary");
  }
  return logprob_;
}

UnigramModel::UnigramModel(std::string descriptor, std::vector<std::uint64_t> counts,
                           std::size_t max_input)
    : BuiltinModel(std::move(descriptor), counts.size(), max_input) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0) +
                       static_cast<double>(counts.size());
  logprobs_.reserve(counts.size());
  for (std::uint64_t c : counts) {
    logprobs_.push_back(std::log((static_cast<double>(c) + 1.0) / total));
  }
}

UnigramModel UnigramModel::from_file(const std::filesystem::path& path, std::size_t max_input) {
  const std::string descriptor = "unigram:" + path.string();
  nlohmann::json doc;
  try {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open counts file " + path.string());
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("counts file " + path.string() + ": " + e.what());
  }

  auto fail = [&](const std::string& what) {
    return ConfigError("counts file " + path.string() + ": " + what);
  };
  if (!doc.is_object() || !doc.contains("vocab_size") || !doc["vocab_size"].is_number_unsigned()) {
    throw fail("expected an object with unsigned 'vocab_size'");
  }
  const auto vocab = doc["vocab_size"].get<std::size_t>();
  if (vocab == 0) throw fail("vocab_size must be positive");
  if (!doc.contains("counts")) throw fail("missing 'counts'");

  std::vector<std::uint64_t> counts(vocab, 0);
  const auto& raw = doc["counts"];
  if (raw.is_array()) {
    if (raw.size() != vocab) throw fail("'counts' array length differs from vocab_size");
    for (std::size_t i = 0; i < vocab; ++i) {
      if (!raw[i].is_number_unsigned()) throw fail("counts must be non-negative integers");
      counts[i] = raw[i].get<std::uint64_t>();
    }
  } else if (raw.is_object()) {
    for (const auto& [key, value] : raw.items()) {
      const auto id = csv::to_integer(key);
      if (!id || *id < 0 || static_cast<std::size_t>(*id) >= vocab) {
        throw fail("token id '" + key + "' outside [0, vocab_size)");
      }
      if (!value.is_number_unsigned()) throw fail("counts must be non-negative integers");
      counts[static_cast<std::size_t>(*id)] = value.get<std::uint64_t>();
    }
  } else {
    throw fail("'counts' must be an array or an object");
  }
  return UnigramModel(descriptor, std::move(counts), max_input);
}

double UnigramModel::token_logprob(std::span<const TokenId>, TokenId next) const {
  if (next < 0 || static_cast<std::size_t>(next) >= logprobs_.size()) {
    throw PreconditionError("token id " + std::to_string(next) + " outside vocabulary");
  }
  return logprobs_[static_cast<std::size_t>(next)];
}

std::vector<BuiltinFamily> builtin_models() {
  return {
      {"uniform:V", "byte tokenizer, uniform next-token distribution over V symbols"},
      {"unigram:PATH", "byte tokenizer, add-one smoothed unigram distribution from a counts file"},
  };
}

std::unique_ptr<BuiltinModel> make_builtin(std::string_view descriptor, std::size_t max_input) {
  const auto colon = descriptor.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("builtin descriptor '" + std::string(descriptor) +
                      "' must be uniform:V or unigram:PATH");
  }
  const std::string_view family = descriptor.substr(0, colon);
  const std::string_view argument = descriptor.substr(colon + 1);
  if (family == "uniform") {
    const auto v = csv::to_integer(argument);
    if (!v || *v <= 0) {
      throw ConfigError("builtin '" + std::string(descriptor) +
                        "': vocabulary size must be a positive integer");
    }
    return std::make_unique<UniformModel>(static_cast<std::size_t>(*v), max_input);
  }
  if (family == "unigram") {
    if (argument.empty()) throw ConfigError("builtin 'unigram:' needs a counts file path");
    return std::make_unique<UnigramModel>(UnigramModel::from_file(argument, max_input));
  }
  throw ConfigError("unknown builtin family '" + std::string(family) + "'");
}

std::unique_ptr<LanguageModel> open_model(const std::optional<std::string>& builtin,
                                          const std::optional<std::string>& endpoint,
                                          std::optional<std::size_t> max_input,
                                          RemoteOptions remote) {
  if (builtin) return make_builtin(*builtin, max_input.value_or(kDefaultMaxInput));
  if (endpoint) {
    remote.max_input = max_input;
    return std::make_unique<RemoteModel>(*endpoint, remote);
  }
  throw ConfigError("no model configured: pass --builtin or --endpoint (or set CEMAINT_ENDPOINT)");
}

}  // namespace cemaint

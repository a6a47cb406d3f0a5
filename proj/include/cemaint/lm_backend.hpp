#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cemaint/errors.hpp"

namespace cemaint {

using TokenId = std::int64_t;

struct TokenSequence {
  std::vector<TokenId> ids;

  std::size_t length() const { return ids.size(); }
  bool operator==(const TokenSequence&) const = default;
};

/// Natural-log probability of each actual next token; values[i] scores
/// ids[i + 1] given ids[0..i].
struct LogprobVector {
  std::vector<double> values;

  std::size_t target_count() const { return values.size(); }
};

struct RemoteEndpoint {
  std::string url;
};

struct BuiltinDescriptor {
  std::string descriptor;  // "uniform:V" or "unigram:PATH"
};

struct ModelSpec {
  std::string model_id;
  std::size_t max_input = 0;  // tokens per forward pass, >= 2
  std::variant<RemoteEndpoint, BuiltinDescriptor> backend;
};

inline constexpr std::size_t kDefaultMaxInput = 1024;

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const ModelSpec& spec() const = 0;
  virtual std::size_t vocab_size() const = 0;
  /// Token to prepend to each chunk when BOS prepending is requested.
  virtual std::optional<TokenId> bos_id() const = 0;

  virtual TokenSequence tokenize(std::string_view text) const = 0;

  /// Requires 2 <= tokens.length() <= spec().max_input; throws
  /// PreconditionError otherwise. The result has tokens.length() - 1 values.
  LogprobVector next_token_logprobs(const TokenSequence& tokens) const;

 protected:
  virtual LogprobVector compute_logprobs(const TokenSequence& tokens) const = 0;
};

// Builtin reference models -------------------------------------------------
//
// Byte-level tokenizer: byte b maps to id b (or b mod V when V < 256), so
// tests never need an external vocabulary. Both builtins ignore context.

class BuiltinModel : public LanguageModel {
 public:
  const ModelSpec& spec() const override { return spec_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  std::optional<TokenId> bos_id() const override { return TokenId{0}; }
  TokenSequence tokenize(std::string_view text) const override;

  /// log p(next | context). Must be a proper distribution over [0, V).
  virtual double token_logprob(std::span<const TokenId> context, TokenId next) const = 0;

 protected:
  BuiltinModel(std::string descriptor, std::size_t vocab_size, std::size_t max_input);
  LogprobVector compute_logprobs(const TokenSequence& tokens) const override;

 private:
  ModelSpec spec_;
  std::size_t vocab_size_;
};

class UniformModel final : public BuiltinModel {
 public:
  UniformModel(std::size_t vocab_size, std::size_t max_input = kDefaultMaxInput);
  double token_logprob(std::span<const TokenId> context, TokenId next) const override;

 private:
  double logprob_;
};

/// Empirical unigram distribution with add-one smoothing:
/// p(t) = (count[t] + 1) / (sum(count) + V).
class UnigramModel final : public BuiltinModel {
 public:
  UnigramModel(std::string descriptor, std::vector<std::uint64_t> counts,
               std::size_t max_input = kDefaultMaxInput);

  /// Counts file: {"vocab_size": V, "counts": {"<token id>": count, ...}}.
  /// `counts` may also be an array of length V.
  static UnigramModel from_file(const std::filesystem::path& path,
                                std::size_t max_input = kDefaultMaxInput);

  double token_logprob(std::span<const TokenId> context, TokenId next) const override;

 private:
  std::vector<double> logprobs_;
};

struct BuiltinFamily {
  std::string pattern;  // e.g. "uniform:V"
  std::string description;
};

/// Builtin model families understood by make_builtin().
std::vector<BuiltinFamily> builtin_models();

/// Parse "uniform:V" or "unigram:PATH". Throws ConfigError on a malformed
/// descriptor, V == 0, max_input < 2 or an unreadable counts file.
std::unique_ptr<BuiltinModel> make_builtin(std::string_view descriptor,
                                           std::size_t max_input = kDefaultMaxInput);

// Remote model ---------------------------------------------------------------

struct RemoteOptions {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  std::size_t max_in_flight = 4;
  std::chrono::seconds timeout{600};
  /// Overrides the shim's max_input; must not exceed it.
  std::optional<std::size_t> max_input;
};

/// Client for the HTTP shim (GET /info, POST /tokenize, POST /logprobs).
/// Transport failures, 5xx replies and malformed bodies are retried with
/// exponential backoff; 4xx replies are not.
class RemoteModel final : public LanguageModel {
 public:
  explicit RemoteModel(std::string url, RemoteOptions options = {});
  ~RemoteModel() override;

  const ModelSpec& spec() const override { return spec_; }
  std::size_t vocab_size() const override { return vocab_size_; }
  std::optional<TokenId> bos_id() const override { return bos_id_; }
  TokenSequence tokenize(std::string_view text) const override;

 protected:
  LogprobVector compute_logprobs(const TokenSequence& tokens) const override;

 private:
  // One logical request under the retry policy. `accept` parses the reply
  // body and throws to reject it, which counts as a transport failure.
  void call(const std::string& method, const std::string& path, const std::string& body,
            const std::function<void(const std::string&)>& accept) const;

  std::string base_url_;
  std::string path_prefix_;
  RemoteOptions options_;
  ModelSpec spec_;
  std::size_t vocab_size_ = 0;
  std::optional<TokenId> bos_id_;
  mutable std::counting_semaphore<1024> in_flight_;
};

/// Build a model from CLI-style settings: a builtin descriptor wins over an
/// endpoint URL.
std::unique_ptr<LanguageModel> open_model(const std::optional<std::string>& builtin,
                                          const std::optional<std::string>& endpoint,
                                          std::optional<std::size_t> max_input,
                                          RemoteOptions remote = {});

}  // namespace cemaint

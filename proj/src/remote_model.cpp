#include <algorithm>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "cemaint/lm_backend.hpp"

namespace cemaint {

namespace {

using nlohmann::json;

// Reply body that parsed but violates the wire contract.
struct MalformedReply : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class InFlightSlot {
 public:
  explicit InFlightSlot(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
  ~InFlightSlot() { sem_.release(); }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::counting_semaphore<1024>& sem_;
};

std::ptrdiff_t checked_in_flight(std::size_t n) {
  if (n < 1 || n > 1024) throw ConfigError("concurrency limit must be in [1, 1024]");
  return static_cast<std::ptrdiff_t>(n);
}

json parse_object(const std::string& body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw MalformedReply("reply is not a JSON object");
  return doc;
}

}  // namespace

RemoteModel::RemoteModel(std::string url, RemoteOptions options)
    : options_(options), in_flight_(checked_in_flight(options.max_in_flight)) {
  if (url.empty()) throw ConfigError("empty endpoint URL");
  // httplib wants scheme://host:port; any path part becomes a request prefix.
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  base_url_ = url.substr(0, slash);
  if (slash != std::string::npos) path_prefix_ = url.substr(slash);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();

  std::size_t shim_max = 0;
  call("GET", "/info", "", [&](const std::string& body) {
    const json doc = parse_object(body);
    if (!doc.contains("model_id") || !doc["model_id"].is_string() ||
        !doc.contains("max_input") || !doc["max_input"].is_number_integer() ||
        !doc.contains("vocab_size") || !doc["vocab_size"].is_number_integer()) {
      throw MalformedReply("/info needs model_id, max_input and vocab_size");
    }
    if (doc["max_input"].get<long long>() < 2 || doc["vocab_size"].get<long long>() < 1) {
      throw MalformedReply("/info reports max_input < 2 or empty vocabulary");
    }
    spec_.model_id = doc["model_id"].get<std::string>();
    shim_max = doc["max_input"].get<std::size_t>();
    vocab_size_ = doc["vocab_size"].get<std::size_t>();
    if (doc.contains("bos_id") && doc["bos_id"].is_number_integer()) {
      bos_id_ = doc["bos_id"].get<TokenId>();
    }
  });

  spec_.max_input = shim_max;
  if (options_.max_input) {
    if (*options_.max_input < 2 || *options_.max_input > shim_max) {
      throw ConfigError("max_input override " + std::to_string(*options_.max_input) +
                        " outside [2, " + std::to_string(shim_max) + "] supported by " + url);
    }
    spec_.max_input = *options_.max_input;
  }
  spec_.backend = RemoteEndpoint{std::move(url)};
}

RemoteModel::~RemoteModel() = default;

void RemoteModel::call(const std::string& method, const std::string& path,
                       const std::string& body,
                       const std::function<void(const std::string&)>& accept) const {
  std::string last_error;
  const int attempts = std::max(0, options_.max_retries) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(options_.initial_backoff * (1 << (attempt - 1)));
    }
    {
      InFlightSlot slot(in_flight_);
      httplib::Client client(base_url_);
      const auto seconds = static_cast<time_t>(options_.timeout.count());
      client.set_connection_timeout(10, 0);
      client.set_read_timeout(seconds, 0);
      client.set_write_timeout(seconds, 0);
      const std::string full_path = path_prefix_ + path;
      httplib::Result res = method == "GET"
                                ? client.Get(full_path)
                                : client.Post(full_path, body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status >= 500) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status >= 400) {
        throw PreconditionError(method + " " + path + " rejected with HTTP " +
                                std::to_string(res->status) + ": " + res->body);
      }
      try {
        accept(res->body);
        return;
      } catch (const MalformedReply& e) {
        last_error = std::string("malformed reply: ") + e.what();
      } catch (const json::exception& e) {
        last_error = std::string("malformed reply: ") + e.what();
      }
    }
  }
  throw TransportError(method + " " + base_url_ + path_prefix_ + path + " failed after " +
                       std::to_string(attempts) + " attempt(s): " + last_error);
}

TokenSequence RemoteModel::tokenize(std::string_view text) const {
  TokenSequence tokens;
  if (text.empty()) return tokens;
  const std::string body = json{{"text", std::string(text)}}.dump();
  call("POST", "/tokenize", body, [&](const std::string& reply) {
    const json doc = parse_object(reply);
    if (!doc.contains("ids") || !doc["ids"].is_array()) throw MalformedReply("missing 'ids'");
    std::vector<TokenId> ids;
    ids.reserve(doc["ids"].size());
    for (const auto& id : doc["ids"]) {
      if (!id.is_number_integer() || id.get<TokenId>() < 0) {
        throw MalformedReply("token ids must be non-negative integers");
      }
      ids.push_back(id.get<TokenId>());
    }
    tokens.ids = std::move(ids);
  });
  return tokens;
}

LogprobVector RemoteModel::compute_logprobs(const TokenSequence& tokens) const {
  LogprobVector out;
  const std::string body = json{{"ids", tokens.ids}}.dump();
  call("POST", "/logprobs", body, [&](const std::string& reply) {
    const json doc = parse_object(reply);
    if (!doc.contains("logprobs") || !doc["logprobs"].is_array()) {
      throw MalformedReply("missing 'logprobs'");
    }
    const auto& values = doc["logprobs"];
    if (values.size() + 1 != tokens.length()) {
      throw MalformedReply("expected " + std::to_string(tokens.length() - 1) + " logprobs, got " +
                           std::to_string(values.size()));
    }
    std::vector<double> parsed;
    parsed.reserve(values.size());
    for (const auto& v : values) {
      if (!v.is_number() || !(v.get<double>() <= 0.0)) {
        throw MalformedReply("logprobs must be numbers <= 0");
      }
      parsed.push_back(v.get<double>());
    }
    out.values = std::move(parsed);
  });
  return out;
}

}  // namespace cemaint

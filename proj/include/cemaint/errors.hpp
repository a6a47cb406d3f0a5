#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cemaint {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (ratings CSV, scores CSV).
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Invalid model descriptor, counts file or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Remote model unreachable or replied with something we cannot use.
class TransportError : public Error {
 public:
  using Error::Error;
};

// Caller broke an operation's precondition (e.g. unchunked sequence).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// File produced no prediction targets at all.
class UnscorableError : public Error {
 public:
  using Error::Error;
};

// Logistic fit diverged because the classes are (quasi-)separable.
class SeparationError : public Error {
 public:
  using Error::Error;
};

// A fold or subset cannot be fitted (single class, zero variance).
class DegenerateFoldError : public Error {
 public:
  using Error::Error;
};

// Non-fatal messages collected along a computation. Functions take a
// nullable pointer so callers that do not care can pass nothing.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace cemaint

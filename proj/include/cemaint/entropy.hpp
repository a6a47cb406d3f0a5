#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cemaint/errors.hpp"
#include "cemaint/lm_backend.hpp"

namespace cemaint {

struct ChunkScore {
  std::size_t index = 0;
  std::size_t n_targets = 0;  // predicted tokens in the chunk, >= 1
  double ce = 0.0;            // nats
};

struct CrossEntropyResult {
  std::string file_id;
  std::string model_id;
  std::vector<ChunkScore> chunks;
  std::size_t total_targets = 0;
  double ce = 0.0;  // token-weighted mean over chunks
  double perplexity = 1.0;
};

struct AggregateCe {
  double ce = 0.0;
  std::size_t total_targets = 0;
};

/// Summary of per-file cross-entropy values. Higher moments use the adjusted
/// sample estimators (G1 skewness, G2 excess kurtosis) and are absent when
/// there are too few values or no spread.
struct DescriptiveStats {
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
  double mean = 0.0;
  std::optional<double> variance;  // n - 1 denominator; needs n >= 2
  std::optional<double> skewness;  // needs n >= 3 and variance > 0
  std::optional<double> kurtosis;  // needs n >= 4 and variance > 0
};

/// Split into consecutive slices of at most `max_input` tokens. Each chunk
/// restarts the model context, so its first token is never a target; a
/// trailing chunk of a single token therefore has nothing to score and is
/// dropped with a warning. Throws PreconditionError when max_input < 2.
std::vector<TokenSequence> chunk_tokens(const TokenSequence& tokens, std::size_t max_input,
                                        Warnings* warnings = nullptr);

/// Mean negative logprob of one chunk.
ChunkScore chunk_ce(const LogprobVector& logprobs, std::size_t index = 0);

/// Token-weighted mean of chunk cross-entropies. Throws UnscorableError on an
/// empty list.
AggregateCe aggregate_ce(std::span<const ChunkScore> chunks);

DescriptiveStats describe(std::span<const double> values, Warnings* warnings = nullptr);

struct ScoringOptions {
  bool prepend_bos = false;
};

/// Tokenize, chunk, score and aggregate one file. With `prepend_bos` every
/// chunk carries max_input - 1 real tokens behind the model's BOS id, and all
/// real tokens become targets.
CrossEntropyResult score_text(const LanguageModel& model, std::string_view file_id,
                              std::string_view text, ScoringOptions options = {},
                              Warnings* warnings = nullptr);

// Scores CSV ---------------------------------------------------------------

struct ScoreRow {
  std::string file;
  std::string model_id;
  std::size_t lloc = 0;
  std::size_t total_targets = 0;
  std::size_t n_chunks = 0;
  double cross_entropy = 0.0;
  double perplexity = 1.0;
};

inline constexpr std::string_view kScoresHeader =
    "file,model_id,lloc,total_targets,n_chunks,cross_entropy,perplexity";

/// Rows are written sorted by file path with 6-decimal floats.
std::string format_scores_csv(std::vector<ScoreRow> rows);
std::vector<ScoreRow> parse_scores_csv(std::string_view text);
std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path);

}  // namespace cemaint

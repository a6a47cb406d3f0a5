#include "cemaint/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cemaint/csv.hpp"

namespace cemaint {

std::vector<TokenSequence> chunk_tokens(const TokenSequence& tokens, std::size_t max_input,
                                        Warnings* warnings) {
  if (max_input < 2) {
    throw PreconditionError("max_input must be >= 2, got " + std::to_string(max_input));
  }
  std::vector<TokenSequence> chunks;
  for (std::size_t start = 0; start < tokens.length(); start += max_input) {
    const std::size_t stop = std::min(tokens.length(), start + max_input);
    if (stop - start == 1) {
      warn(warnings, "dropped trailing 1-token chunk at offset " + std::to_string(start) +
                         " (no prediction target)");
      break;
    }
    chunks.push_back(TokenSequence{{tokens.ids.begin() + static_cast<std::ptrdiff_t>(start),
                                    tokens.ids.begin() + static_cast<std::ptrdiff_t>(stop)}});
  }
  return chunks;
}

ChunkScore chunk_ce(const LogprobVector& logprobs, std::size_t index) {
  if (logprobs.target_count() == 0) {
    throw PreconditionError("chunk_ce needs at least one target");
  }
  double sum = 0.0;
  for (double v : logprobs.values) sum += v;
  double ce = -sum / static_cast<double>(logprobs.target_count());
  if (ce == 0.0) ce = 0.0;  // no negative zero
  return ChunkScore{index, logprobs.target_count(), ce};
}

AggregateCe aggregate_ce(std::span<const ChunkScore> chunks) {
  if (chunks.empty()) throw UnscorableError("unscorable file: no scored chunks");
  double weighted = 0.0;
  std::size_t total = 0;
  for (const ChunkScore& chunk : chunks) {
    weighted += static_cast<double>(chunk.n_targets) * chunk.ce;
    total += chunk.n_targets;
  }
  if (total == 0) throw UnscorableError("unscorable file: chunks carry no targets");
  return AggregateCe{weighted / static_cast<double>(total), total};
}

DescriptiveStats describe(std::span<const double> values, Warnings* warnings) {
  if (values.empty()) throw PreconditionError("describe needs at least one value");
  DescriptiveStats stats;
  const auto n = values.size();
  const double nd = static_cast<double>(n);
  stats.n = n;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  stats.min = *lo;
  stats.max = *hi;
  stats.range = stats.max - stats.min;

  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / nd;
  if (n < 2) return stats;

  if (stats.min == stats.max) {
    stats.variance = 0.0;
    warn(warnings, "zero variance: skewness and kurtosis undefined");
    return stats;
  }

  // Central moments about the mean, population normalization.
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - stats.mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= nd;
  m3 /= nd;
  m4 /= nd;
  stats.variance = m2 * nd / (nd - 1.0);

  if (n >= 3) {
    const double g1 = m3 / std::pow(m2, 1.5);
    stats.skewness = std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * g1;
  }
  if (n >= 4) {
    const double g2 = m4 / (m2 * m2) - 3.0;
    stats.kurtosis = ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
  }
  return stats;
}

CrossEntropyResult score_text(const LanguageModel& model, std::string_view file_id,
                              std::string_view text, ScoringOptions options,
                              Warnings* warnings) {
  CrossEntropyResult result;
  result.file_id = std::string(file_id);
  result.model_id = model.spec().model_id;

  const TokenSequence tokens = model.tokenize(text);
  const std::size_t max_input = model.spec().max_input;
  std::vector<TokenSequence> chunks;
  if (options.prepend_bos) {
    const auto bos = model.bos_id();
    if (!bos) throw ConfigError("prepend_bos requested but model '" + result.model_id +
                                "' reports no BOS token");
    for (std::size_t start = 0; start < tokens.length(); start += max_input - 1) {
      const std::size_t stop = std::min(tokens.length(), start + max_input - 1);
      TokenSequence chunk;
      chunk.ids.reserve(stop - start + 1);
      chunk.ids.push_back(*bos);
      chunk.ids.insert(chunk.ids.end(), tokens.ids.begin() + static_cast<std::ptrdiff_t>(start),
                       tokens.ids.begin() + static_cast<std::ptrdiff_t>(stop));
      chunks.push_back(std::move(chunk));
    }
  } else {
    Warnings local;
    chunks = chunk_tokens(tokens, max_input, &local);
    for (auto& message : local) warn(warnings, result.file_id + ": " + message);
  }

  result.chunks.reserve(chunks.size());
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    result.chunks.push_back(chunk_ce(model.next_token_logprobs(chunks[i]), i));
  }
  if (result.chunks.empty()) {
    throw UnscorableError("unscorable file " + result.file_id + ": " +
                          std::to_string(tokens.length()) + " token(s), no prediction target");
  }
  const AggregateCe aggregate = aggregate_ce(result.chunks);
  result.ce = aggregate.ce;
  result.total_targets = aggregate.total_targets;
  result.perplexity = std::exp(result.ce);
  return result;
}

// --- Scores CSV ---------------------------------------------------------------

std::string format_scores_csv(std::vector<ScoreRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ScoreRow& a, const ScoreRow& b) {
    return a.file < b.file;
  });
  std::ostringstream out;
  out << kScoresHeader << '\n';
  for (const ScoreRow& row : rows) {
    out << csv::escape(row.file) << ',' << csv::escape(row.model_id) << ',' << row.lloc << ','
        << row.total_targets << ',' << row.n_chunks << ',' << csv::fixed(row.cross_entropy) << ','
        << csv::fixed(row.perplexity) << '\n';
  }
  return out.str();
}

std::vector<ScoreRow> parse_scores_csv(std::string_view text) {
  const auto rows = csv::parse(text);
  if (rows.empty()) throw IngestionError("scores CSV is empty");
  static const std::vector<std::string> columns = {
      "file", "model_id", "lloc", "total_targets", "n_chunks", "cross_entropy", "perplexity"};
  std::vector<std::size_t> index;
  for (const auto& name : columns) {
    const auto found = csv::column_index(rows.front().fields, name);
    if (!found) throw IngestionError("scores header (line 1): missing column '" + name + "'");
    index.push_back(*found);
  }

  std::vector<ScoreRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& fields = rows[r].fields;
    const std::string where = "scores row " + std::to_string(r) + " (line " +
                              std::to_string(rows[r].line) + ")";
    auto field = [&](std::size_t c) -> const std::string& {
      if (index[c] >= fields.size()) {
        throw IngestionError(where + ": missing column '" + columns[c] + "'");
      }
      return fields[index[c]];
    };
    auto count = [&](std::size_t c) {
      const auto v = csv::to_integer(field(c));
      if (!v || *v < 0) {
        throw IngestionError(where + ": invalid count '" + field(c) + "' in column '" +
                             columns[c] + "'");
      }
      return static_cast<std::size_t>(*v);
    };
    auto real = [&](std::size_t c) {
      const auto v = csv::to_double(field(c));
      if (!v) {
        throw IngestionError(where + ": non-numeric value '" + field(c) + "' in column '" +
                             columns[c] + "'");
      }
      return *v;
    };
    ScoreRow row;
    row.file = field(0);
    row.model_id = field(1);
    row.lloc = count(2);
    row.total_targets = count(3);
    row.n_chunks = count(4);
    row.cross_entropy = real(5);
    row.perplexity = real(6);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<ScoreRow> read_scores_csv(const std::filesystem::path& path) {
  return parse_scores_csv(csv::read_file(path));
}

}  // namespace cemaint

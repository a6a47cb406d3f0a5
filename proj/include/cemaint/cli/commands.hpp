#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "cemaint/cli/config.hpp"
#include "cemaint/corpus.hpp"
#include "cemaint/entropy.hpp"
#include "cemaint/lm_backend.hpp"

namespace cemaint::cli {

struct ScoredCorpus {
  std::vector<ScoreRow> rows;          // sorted by file
  std::vector<CorpusFailure> failures; // read, transport and unscorable failures
  Warnings warnings;
};

/// Score every file with up to `concurrency` workers. Per-file failures are
/// recorded and never abort the run; output order does not depend on
/// scheduling.
ScoredCorpus score_corpus(const Corpus& corpus, const LanguageModel& model,
                          const std::string& model_id, ScoringOptions options,
                          std::size_t concurrency);

// Each command writes into config.out and returns the process exit code.
int cmd_score(const RunConfig& config, std::ostream& log);
int cmd_evaluate(const RunConfig& config, std::ostream& log);
int cmd_stats(const RunConfig& config, std::ostream& log);
int cmd_analyze(const RunConfig& config, std::ostream& log);
int cmd_ratings_adapt(const RunConfig& config, std::ostream& log);
/// Writes scores.csv and ratings.csv for a synthetic confounded corpus.
int cmd_synthetic(const RunConfig& config, std::ostream& log);

/// Full command-line entry point (argv[0] excluded).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cemaint::cli

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cemaint/corpus.hpp"
#include "cemaint/entropy.hpp"
#include "cemaint/errors.hpp"

namespace cemaint {

struct LabeledInstance {
  std::string file_id;
  std::size_t lloc = 0;  // > 0
  double ce = 0.0;       // nats, > 0
  int label = 0;         // 0 or 1
  Dimension dimension = Dimension::Ov;
};

/// Which inputs a classifier sees: LLOC alone (baseline), cross-entropy
/// alone, or both.
enum class FeatureSet { Lloc, Ce, Both };

inline constexpr FeatureSet kAllFeatureSets[] = {FeatureSet::Lloc, FeatureSet::Ce,
                                                 FeatureSet::Both};

std::string_view feature_set_name(FeatureSet f);  // "lloc", "ce", "both"
std::optional<FeatureSet> parse_feature_set(std::string_view name);

/// Column names in matrix order. Both -> {"log_ce", "log_lloc"}.
std::vector<std::string> feature_columns(FeatureSet f);

enum class ScalingMode { Global, PerFold };

std::string_view scaling_mode_name(ScalingMode m);  // "global", "per-fold"
std::optional<ScalingMode> parse_scaling_mode(std::string_view name);

/// 1 when the expert most likely gives the favourable extreme answer:
/// P(strongly agree) > 0.5 for Ov/Rd/Ud, P(strongly disagree) > 0.5 for the
/// negatively phrased Cx/Md.
int binarize(const MaintainabilityRating& rating, Dimension dimension);

/// Log-transformed, standardized features. Standardization uses the
/// population standard deviation of the rows it was fitted on.
struct FeatureMatrix {
  Eigen::MatrixXd values;  // one row per instance
  std::vector<std::string> columns;
  std::vector<double> mean;
  std::vector<double> std;
  ScalingMode mode = ScalingMode::PerFold;
};

/// In PerFold mode the scaling statistics come from `train_rows` only and are
/// applied to every row; in Global mode all rows are used and `train_rows` is
/// ignored. Throws IngestionError for non-positive ce/lloc and
/// DegenerateFoldError for a zero-variance column.
FeatureMatrix build_features(std::span<const LabeledInstance> instances, FeatureSet features,
                             ScalingMode mode, std::span<const std::size_t> train_rows = {});

Eigen::VectorXd label_vector(std::span<const LabeledInstance> instances);

// Joining scores with ratings ------------------------------------------------

struct JoinResult {
  std::vector<LabeledInstance> instances;  // in ratings order
  std::vector<std::string> unmatched_scores;
  std::vector<std::string> unmatched_ratings;
  std::vector<std::string> rejected;  // matched but ce or lloc not positive
};

/// Match score rows to ratings by file id. An exact id match wins; otherwise
/// a rating id matches a score row whose path basename equals it, provided
/// exactly one such row exists.
JoinResult join_instances(std::span<const ScoreRow> scores,
                          std::span<const MaintainabilityRating> ratings, Dimension dimension);

}  // namespace cemaint

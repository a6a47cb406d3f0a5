#include "cemaint/features.hpp"

#include <cmath>
#include <map>
#include <set>
#include <unordered_map>

namespace cemaint {

std::string_view feature_set_name(FeatureSet f) {
  switch (f) {
    case FeatureSet::Lloc: return "lloc";
    case FeatureSet::Ce: return "ce";
    case FeatureSet::Both: return "both";
  }
  return "?";
}

std::optional<FeatureSet> parse_feature_set(std::string_view name) {
  for (FeatureSet f : kAllFeatureSets) {
    if (feature_set_name(f) == name) return f;
  }
  return std::nullopt;
}

std::vector<std::string> feature_columns(FeatureSet f) {
  switch (f) {
    case FeatureSet::Lloc: return {"log_lloc"};
    case FeatureSet::Ce: return {"log_ce"};
    case FeatureSet::Both: return {"log_ce", "log_lloc"};
  }
  return {};
}

std::string_view scaling_mode_name(ScalingMode m) {
  return m == ScalingMode::Global ? "global" : "per-fold";
}

std::optional<ScalingMode> parse_scaling_mode(std::string_view name) {
  if (name == "global") return ScalingMode::Global;
  if (name == "per-fold") return ScalingMode::PerFold;
  return std::nullopt;
}

int binarize(const MaintainabilityRating& rating, Dimension dimension) {
  const LikertProbabilities& p = rating[dimension];
  switch (dimension) {
    case Dimension::Ov:
    case Dimension::Rd:
    case Dimension::Ud:
      return p.strongly_agree > 0.5 ? 1 : 0;
    case Dimension::Cx:
    case Dimension::Md:
      return p.strongly_disagree > 0.5 ? 1 : 0;
  }
  return 0;
}

FeatureMatrix build_features(std::span<const LabeledInstance> instances, FeatureSet features,
                             ScalingMode mode, std::span<const std::size_t> train_rows) {
  FeatureMatrix fm;
  fm.columns = feature_columns(features);
  fm.mode = mode;
  const auto rows = static_cast<Eigen::Index>(instances.size());
  const auto cols = static_cast<Eigen::Index>(fm.columns.size());
  fm.values.resize(rows, cols);

  for (Eigen::Index r = 0; r < rows; ++r) {
    const LabeledInstance& inst = instances[static_cast<std::size_t>(r)];
    if (!(inst.ce > 0.0) || inst.lloc == 0) {
      throw IngestionError("instance " + inst.file_id +
                           " rejected: log transform needs ce > 0 and lloc > 0");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const bool is_ce = fm.columns[static_cast<std::size_t>(c)] == "log_ce";
      fm.values(r, c) = std::log(is_ce ? inst.ce : static_cast<double>(inst.lloc));
    }
  }

  std::vector<std::size_t> fit_rows;
  if (mode == ScalingMode::Global) {
    fit_rows.resize(instances.size());
    for (std::size_t i = 0; i < fit_rows.size(); ++i) fit_rows[i] = i;
  } else {
    if (train_rows.empty()) {
      throw PreconditionError("per-fold scaling needs a non-empty training index set");
    }
    fit_rows.assign(train_rows.begin(), train_rows.end());
  }
  if (fit_rows.empty()) throw PreconditionError("no rows to fit the scaler on");

  const double n = static_cast<double>(fit_rows.size());
  for (Eigen::Index c = 0; c < cols; ++c) {
    double sum = 0.0;
    for (std::size_t r : fit_rows) sum += fm.values(static_cast<Eigen::Index>(r), c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r : fit_rows) {
      const double d = fm.values(static_cast<Eigen::Index>(r), c) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    if (!(sd > 0.0)) {
      throw DegenerateFoldError("column " + fm.columns[static_cast<std::size_t>(c)] +
                                " has zero variance in the scaling rows");
    }
    fm.mean.push_back(mean);
    fm.std.push_back(sd);
    fm.values.col(c) = (fm.values.col(c).array() - mean) / sd;
  }
  return fm;
}

Eigen::VectorXd label_vector(std::span<const LabeledInstance> instances) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(instances.size()));
  for (std::size_t i = 0; i < instances.size(); ++i) {
    y(static_cast<Eigen::Index>(i)) = instances[i].label;
  }
  return y;
}

namespace {

std::string basename_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

}  // namespace

JoinResult join_instances(std::span<const ScoreRow> scores,
                          std::span<const MaintainabilityRating> ratings, Dimension dimension) {
  std::unordered_map<std::string, std::size_t> by_id;
  std::map<std::string, std::vector<std::size_t>> by_basename;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    by_id.emplace(scores[i].file, i);
    by_basename[basename_of(scores[i].file)].push_back(i);
  }

  JoinResult result;
  std::set<std::size_t> used;
  for (const MaintainabilityRating& rating : ratings) {
    std::optional<std::size_t> match;
    if (auto it = by_id.find(rating.file_id); it != by_id.end()) {
      match = it->second;
    } else if (auto jt = by_basename.find(basename_of(rating.file_id));
               jt != by_basename.end() && jt->second.size() == 1) {
      match = jt->second.front();
    }
    if (!match || used.count(*match) > 0) {
      result.unmatched_ratings.push_back(rating.file_id);
      continue;
    }
    used.insert(*match);
    const ScoreRow& row = scores[*match];
    if (!(row.cross_entropy > 0.0) || row.lloc == 0) {
      result.rejected.push_back(row.file);
      continue;
    }
    result.instances.push_back(LabeledInstance{row.file, row.lloc, row.cross_entropy,
                                               binarize(rating, dimension), dimension});
  }
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (used.count(i) == 0) result.unmatched_scores.push_back(scores[i].file);
  }
  return result;
}

}  // namespace cemaint

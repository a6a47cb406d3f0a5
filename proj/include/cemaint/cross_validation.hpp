#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cemaint/features.hpp"
#include "cemaint/forest.hpp"
#include "cemaint/metrics.hpp"

namespace cemaint {

enum class Classifier { LogReg, RandomForest };

inline constexpr Classifier kAllClassifiers[] = {Classifier::LogReg, Classifier::RandomForest};

std::string_view classifier_name(Classifier c);  // "logreg", "rf"
std::optional<Classifier> parse_classifier(std::string_view name);

struct MetricsSummary {
  double acc = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  double roc_auc = 0.0;
};

struct EvaluationReport {
  Dimension dimension = Dimension::Ov;
  FeatureSet features = FeatureSet::Lloc;
  Classifier classifier = Classifier::LogReg;
  MetricsSummary summary;          // means over folds
  std::vector<FoldMetrics> folds;  // held-out metrics per fold
  std::size_t n_folds = 0;
  std::uint64_t seed = 0;
  bool shuffled = false;
  ScalingMode scaling = ScalingMode::PerFold;
  Warnings warnings;
};

struct CvOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
  bool shuffle = false;
  ScalingMode scaling = ScalingMode::PerFold;
  ForestParams forest;
};

/// Stratified k-fold assignment: returns the test fold of every instance.
/// Classes are taken in order of first appearance; within a class, instances
/// keep dataset order and fold labels are dealt so that class proportions
/// are preserved and fold sizes differ by at most one. With `shuffle`, each
/// class's fold labels are permuted by a generator seeded from `seed`.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          bool shuffle = false, std::uint64_t seed = 0);

/// Train on k-1 folds, score the held-out fold, average the fold metrics.
/// Throws PreconditionError when a class has fewer than `folds` instances
/// and DegenerateFoldError when a training split is single-class.
EvaluationReport cross_validate(std::span<const LabeledInstance> instances, Dimension dimension,
                                FeatureSet features, Classifier classifier,
                                const CvOptions& options = {});

}  // namespace cemaint

#pragma once

#include <cstddef>
#include <optional>
#include <span>

#include "cemaint/errors.hpp"

namespace cemaint {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const { return tp + fp + fn + tn; }
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);

double accuracy(const ConfusionMatrix& cm);
/// Positive-class F1; 0 when there are no predicted or actual positives.
double f1_score(const ConfusionMatrix& cm);
/// Matthews correlation; 0 (with a warning) when any marginal is empty.
double matthews_corrcoef(const ConfusionMatrix& cm, Warnings* warnings = nullptr);

/// Probability that a random positive outscores a random negative, ties
/// counting one half (Mann-Whitney). Absent, with a warning, when y_true has
/// a single class.
std::optional<double> roc_auc(std::span<const int> y_true, std::span<const double> y_score,
                              Warnings* warnings = nullptr);

struct FoldMetrics {
  double acc = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  std::optional<double> roc_auc;
};

FoldMetrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                            std::span<const double> y_score, Warnings* warnings = nullptr);

}  // namespace cemaint

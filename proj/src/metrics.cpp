#include "cemaint/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace cemaint {

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw PreconditionError("y_true and y_pred differ in length");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] == 1;
    const bool predicted = y_pred[i] == 1;
    if (actual && predicted) ++cm.tp;
    else if (!actual && predicted) ++cm.fp;
    else if (actual && !predicted) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw PreconditionError("accuracy of an empty sample");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double f1_score(const ConfusionMatrix& cm) {
  const std::size_t denominator = 2 * cm.tp + cm.fp + cm.fn;
  if (denominator == 0) return 0.0;
  return 2.0 * static_cast<double>(cm.tp) / static_cast<double>(denominator);
}

double matthews_corrcoef(const ConfusionMatrix& cm, Warnings* warnings) {
  const double tp = static_cast<double>(cm.tp), fp = static_cast<double>(cm.fp);
  const double fn = static_cast<double>(cm.fn), tn = static_cast<double>(cm.tn);
  const double denominator = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denominator == 0.0) {
    warn(warnings, "MCC undefined (empty confusion-matrix margin); reported as 0");
    return 0.0;
  }
  return (tp * tn - fp * fn) / std::sqrt(denominator);
}

std::optional<double> roc_auc(std::span<const int> y_true, std::span<const double> y_score,
                              Warnings* warnings) {
  if (y_true.size() != y_score.size()) {
    throw PreconditionError("y_true and y_score differ in length");
  }
  const std::size_t n = y_true.size();
  const auto positives = static_cast<std::size_t>(std::count(y_true.begin(), y_true.end(), 1));
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    warn(warnings, "ROC AUC undefined for single-class y_true");
    return std::nullopt;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return y_score[a] < y_score[b]; });

  // Sum of 1-based positive ranks, tied groups sharing their mean rank. Twice
  // the rank sum stays integral, so the statistic is exact.
  double twice_rank_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && y_score[order[j]] == y_score[order[i]]) ++j;
    const double twice_mean_rank = static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (y_true[order[k]] == 1) twice_rank_sum += twice_mean_rank;
    }
    i = j;
  }
  const double np = static_cast<double>(positives);
  const double u = (twice_rank_sum - np * (np + 1.0)) / 2.0;
  return u / (np * static_cast<double>(negatives));
}

FoldMetrics compute_metrics(std::span<const int> y_true, std::span<const int> y_pred,
                            std::span<const double> y_score, Warnings* warnings) {
  const ConfusionMatrix cm = confusion(y_true, y_pred);
  FoldMetrics m;
  m.acc = accuracy(cm);
  m.f1 = f1_score(cm);
  m.mcc = matthews_corrcoef(cm, warnings);
  m.roc_auc = roc_auc(y_true, y_score, warnings);
  return m;
}

}  // namespace cemaint

#include "cemaint/cross_validation.hpp"

#include <algorithm>
#include <map>

#include "cemaint/logistic.hpp"
#include "cemaint/rng.hpp"

namespace cemaint {

std::string_view classifier_name(Classifier c) {
  return c == Classifier::LogReg ? "logreg" : "rf";
}

std::optional<Classifier> parse_classifier(std::string_view name) {
  if (name == "logreg") return Classifier::LogReg;
  if (name == "rf") return Classifier::RandomForest;
  return std::nullopt;
}

std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          bool shuffle, std::uint64_t seed) {
  if (folds < 2) throw PreconditionError("need at least 2 folds");
  if (labels.size() < folds) throw PreconditionError("fewer instances than folds");

  // Encode classes by order of first appearance.
  std::map<int, std::size_t> code_of;
  std::vector<std::size_t> encoded(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = code_of.emplace(labels[i], code_of.size());
    encoded[i] = it->second;
  }
  const std::size_t n_classes = code_of.size();

  // Deal the sorted class sequence round-robin over the folds; allocation
  // [f][k] is how many class-k test slots fold f receives.
  std::vector<std::size_t> sorted = encoded;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::vector<std::size_t>> allocation(folds, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < sorted.size(); ++i) ++allocation[i % folds][sorted[i]];

  Rng rng(derive_seed(seed, 0x5F01D5ULL));
  std::vector<std::size_t> test_fold(labels.size());
  for (std::size_t k = 0; k < n_classes; ++k) {
    std::vector<std::size_t> fold_labels;
    for (std::size_t f = 0; f < folds; ++f) fold_labels.insert(fold_labels.end(), allocation[f][k], f);
    if (shuffle) rng.shuffle(fold_labels);
    std::size_t next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (encoded[i] == k) test_fold[i] = fold_labels[next++];
    }
  }
  return test_fold;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<std::size_t>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

}  // namespace

EvaluationReport cross_validate(std::span<const LabeledInstance> instances, Dimension dimension,
                                FeatureSet features, Classifier classifier,
                                const CvOptions& options) {
  EvaluationReport report;
  report.dimension = dimension;
  report.features = features;
  report.classifier = classifier;
  report.n_folds = options.folds;
  report.seed = options.seed;
  report.shuffled = options.shuffle;
  report.scaling = options.scaling;

  std::vector<int> labels(instances.size());
  for (std::size_t i = 0; i < instances.size(); ++i) labels[i] = instances[i].label;
  const auto ones = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  const std::size_t zeros = labels.size() - ones;
  if (options.folds < 2) throw PreconditionError("need at least 2 folds");
  if (ones < options.folds || zeros < options.folds) {
    throw PreconditionError("stratified " + std::to_string(options.folds) +
                            "-fold CV needs >= " + std::to_string(options.folds) +
                            " instances per class; have " + std::to_string(zeros) + " zeros, " +
                            std::to_string(ones) + " ones");
  }

  const std::vector<std::size_t> test_fold =
      stratified_folds(labels, options.folds, options.shuffle, options.seed);

  std::optional<FeatureMatrix> global;
  if (options.scaling == ScalingMode::Global) {
    global = build_features(instances, features, ScalingMode::Global);
  }

  for (std::size_t fold = 0; fold < options.folds; ++fold) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      (test_fold[i] == fold ? test : train).push_back(i);
    }
    std::vector<int> y_train, y_test;
    for (std::size_t i : train) y_train.push_back(labels[i]);
    for (std::size_t i : test) y_test.push_back(labels[i]);
    const auto train_ones = std::count(y_train.begin(), y_train.end(), 1);
    if (train_ones == 0 || static_cast<std::size_t>(train_ones) == y_train.size()) {
      throw DegenerateFoldError("fold " + std::to_string(fold) + ": training part has " +
                                std::to_string(y_train.size()) + " instances, all labeled " +
                                std::to_string(y_train.front()));
    }

    const FeatureMatrix fm = global ? *global
                                    : build_features(instances, features, ScalingMode::PerFold,
                                                     train);
    const Eigen::MatrixXd x_train = take_rows(fm.values, train);
    const Eigen::MatrixXd x_test = take_rows(fm.values, test);

    std::vector<int> predicted;
    std::vector<double> scores;
    if (classifier == Classifier::LogReg) {
      Eigen::VectorXd y(static_cast<Eigen::Index>(y_train.size()));
      for (std::size_t i = 0; i < y_train.size(); ++i) y(static_cast<Eigen::Index>(i)) = y_train[i];
      const LogisticFit fit = fit_logistic(x_train, y, fm.columns);
      const Predictions p = predict_logistic(fit, x_test);
      predicted = p.label;
      scores.assign(p.probability.data(), p.probability.data() + p.probability.size());
    } else {
      Warnings forest_warnings;
      const RandomForest forest = RandomForest::fit(x_train, y_train, options.forest,
                                                    derive_seed(options.seed, fold),
                                                    &forest_warnings);
      const Eigen::VectorXd proba = forest.predict_proba(x_test);
      predicted = forest.predict(x_test);
      scores.assign(proba.data(), proba.data() + proba.size());
      for (auto& w : forest_warnings) report.warnings.push_back("fold " + std::to_string(fold) + ": " + w);
    }

    Warnings fold_warnings;
    FoldMetrics m = compute_metrics(y_test, predicted, scores, &fold_warnings);
    for (auto& w : fold_warnings) report.warnings.push_back("fold " + std::to_string(fold) + ": " + w);
    if (!m.roc_auc) {
      throw DegenerateFoldError("fold " + std::to_string(fold) + ": single-class test part");
    }
    report.folds.push_back(m);
  }

  for (const FoldMetrics& m : report.folds) {
    report.summary.acc += m.acc;
    report.summary.f1 += m.f1;
    report.summary.mcc += m.mcc;
    report.summary.roc_auc += *m.roc_auc;
  }
  const double k = static_cast<double>(report.folds.size());
  report.summary.acc /= k;
  report.summary.f1 /= k;
  report.summary.mcc /= k;
  report.summary.roc_auc /= k;
  return report;
}

}  // namespace cemaint

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cemaint/errors.hpp"

namespace cemaint {

class Rng;

/// Defaults mirror the usual random-forest classifier settings: 100 trees,
/// sqrt(n_features) candidate features per split, bootstrap sampling, fully
/// grown trees.
struct ForestParams {
  std::size_t n_trees = 100;
  std::optional<std::size_t> max_features;  // unset: max(1, floor(sqrt(F)))
  bool bootstrap = true;
  std::optional<std::size_t> max_depth;  // unset: unlimited
  std::size_t min_samples_split = 2;
};

/// Binary CART tree with Gini impurity. Thresholds sit at midpoints between
/// consecutive distinct values; `x <= threshold` goes left. Among equally
/// good splits the first one in (feature, threshold) scan order wins.
class DecisionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    double positive_fraction = 0.0;  // class-1 share of the training samples
  };

  /// `samples` lists training row indices, duplicates allowed (bootstrap).
  static DecisionTree fit(const Eigen::MatrixXd& x, std::span<const int> y,
                          std::span<const std::size_t> samples, const ForestParams& params,
                          Rng& rng);

  double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t depth() const;

 private:
  std::vector<Node> nodes_;
};

class RandomForest {
 public:
  /// Each tree draws from its own stream derived from `seed`, so the result
  /// does not depend on training order. A single-class `y` yields a
  /// degenerate forest that always predicts that class (with a warning).
  static RandomForest fit(const Eigen::MatrixXd& x, std::span<const int> y,
                          const ForestParams& params, std::uint64_t seed,
                          Warnings* warnings = nullptr);

  /// Mean over trees of the leaf class-1 fraction.
  Eigen::VectorXd predict_proba(const Eigen::MatrixXd& x) const;
  /// 1 when the averaged probability exceeds 0.5.
  std::vector<int> predict(const Eigen::MatrixXd& x) const;

  std::size_t tree_count() const { return trees_.size(); }
  const std::vector<DecisionTree>& trees() const { return trees_; }

 private:
  std::vector<DecisionTree> trees_;
  std::optional<int> constant_class_;
  Eigen::Index n_features_ = 0;
};

}  // namespace cemaint

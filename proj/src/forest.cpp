#include "cemaint/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cemaint/rng.hpp"

namespace cemaint {

namespace {

double gini(double positives, double total) {
  if (total <= 0.0) return 0.0;
  const double p = positives / total;
  return 2.0 * p * (1.0 - p);
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
  std::size_t left_count = 0;  // samples going left, in sorted order
};

struct BuildTask {
  std::size_t node;
  std::vector<std::size_t> samples;
  std::size_t depth;
};

}  // namespace

DecisionTree DecisionTree::fit(const Eigen::MatrixXd& x, std::span<const int> y,
                               std::span<const std::size_t> samples, const ForestParams& params,
                               Rng& rng) {
  DecisionTree tree;
  const auto n_features = static_cast<std::size_t>(x.cols());
  const std::size_t max_features =
      params.max_features
          ? std::clamp<std::size_t>(*params.max_features, 1, std::max<std::size_t>(n_features, 1))
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n_features))));

  tree.nodes_.push_back(Node{});
  std::vector<BuildTask> stack;
  stack.push_back({0, {samples.begin(), samples.end()}, 0});
  std::vector<std::size_t> order(n_features);
  std::vector<std::size_t> sorted;

  while (!stack.empty()) {
    BuildTask task = std::move(stack.back());
    stack.pop_back();
    const auto& s = task.samples;
    double positives = 0.0;
    for (std::size_t i : s) positives += y[i];
    const double total = static_cast<double>(s.size());
    tree.nodes_[task.node].positive_fraction = total > 0.0 ? positives / total : 0.0;

    const bool pure = positives == 0.0 || positives == total;
    const bool depth_limited = params.max_depth && task.depth >= *params.max_depth;
    if (pure || depth_limited || s.size() < params.min_samples_split) continue;

    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    Split best;
    bool found = false;
    std::size_t examined = 0;
    for (std::size_t f : order) {
      if (examined >= max_features) break;
      const auto col = static_cast<Eigen::Index>(f);
      sorted = s;
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return x(static_cast<Eigen::Index>(a), col) < x(static_cast<Eigen::Index>(b), col);
      });
      const double lo = x(static_cast<Eigen::Index>(sorted.front()), col);
      const double hi = x(static_cast<Eigen::Index>(sorted.back()), col);
      if (lo == hi) continue;  // constant here; does not count as examined
      ++examined;

      double left_pos = 0.0;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        left_pos += y[sorted[i]];
        const double v = x(static_cast<Eigen::Index>(sorted[i]), col);
        const double next = x(static_cast<Eigen::Index>(sorted[i + 1]), col);
        if (!(v < next)) continue;
        const double left_n = static_cast<double>(i + 1);
        const double right_n = total - left_n;
        const double impurity = (left_n * gini(left_pos, left_n) +
                                 right_n * gini(positives - left_pos, right_n)) /
                                total;
        if (!found || impurity < best.impurity) {
          double threshold = v + (next - v) / 2.0;
          if (threshold >= next) threshold = v;
          best = Split{static_cast<int>(f), threshold, impurity, i + 1};
          found = true;
        }
      }
    }
    if (!found) continue;

    const auto col = static_cast<Eigen::Index>(best.feature);
    std::vector<std::size_t> left, right;
    for (std::size_t i : s) {
      (x(static_cast<Eigen::Index>(i), col) <= best.threshold ? left : right).push_back(i);
    }
    const std::size_t left_id = tree.nodes_.size();
    tree.nodes_.push_back(Node{});
    const std::size_t right_id = tree.nodes_.size();
    tree.nodes_.push_back(Node{});
    Node& node = tree.nodes_[task.node];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left_id;
    node.right = right_id;
    // Right first so the left subtree is built first (stack order).
    stack.push_back({right_id, std::move(right), task.depth + 1});
    stack.push_back({left_id, std::move(left), task.depth + 1});
  }
  return tree;
}

double DecisionTree::predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
  std::size_t id = 0;
  while (nodes_[id].feature >= 0) {
    const Node& node = nodes_[id];
    id = row(node.feature) <= node.threshold ? node.left : node.right;
  }
  return nodes_[id].positive_fraction;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    deepest = std::max(deepest, level[id]);
    if (nodes_[id].feature >= 0) {
      level[nodes_[id].left] = level[id] + 1;
      level[nodes_[id].right] = level[id] + 1;
    }
  }
  return deepest;
}

RandomForest RandomForest::fit(const Eigen::MatrixXd& x, std::span<const int> y,
                               const ForestParams& params, std::uint64_t seed,
                               Warnings* warnings) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (n < 2) throw PreconditionError("random forest needs at least 2 rows");
  if (y.size() != n) throw PreconditionError("label count differs from row count");
  if (params.n_trees == 0) throw PreconditionError("random forest needs at least one tree");

  RandomForest forest;
  forest.n_features_ = x.cols();
  const auto positives = std::count(y.begin(), y.end(), 1);
  if (positives == 0 || static_cast<std::size_t>(positives) == n) {
    forest.constant_class_ = positives == 0 ? 0 : 1;
    warn(warnings, "single-class training labels: forest predicts class " +
                       std::to_string(*forest.constant_class_));
    return forest;
  }

  forest.trees_.reserve(params.n_trees);
  std::vector<std::size_t> samples(n);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng(derive_seed(seed, t));
    if (params.bootstrap) {
      for (auto& s : samples) s = rng.index(n);
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    forest.trees_.push_back(DecisionTree::fit(x, y, samples, params, rng));
  }
  return forest;
}

Eigen::VectorXd RandomForest::predict_proba(const Eigen::MatrixXd& x) const {
  if (x.cols() != n_features_) {
    throw PreconditionError("feature count mismatch: forest has " + std::to_string(n_features_) +
                            ", input has " + std::to_string(x.cols()));
  }
  Eigen::VectorXd proba = Eigen::VectorXd::Zero(x.rows());
  if (constant_class_) {
    proba.setConstant(static_cast<double>(*constant_class_));
    return proba;
  }
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (const DecisionTree& tree : trees_) sum += tree.predict_proba(x.row(i));
    proba(i) = sum / static_cast<double>(trees_.size());
  }
  return proba;
}

std::vector<int> RandomForest::predict(const Eigen::MatrixXd& x) const {
  const Eigen::VectorXd proba = predict_proba(x);
  std::vector<int> labels(static_cast<std::size_t>(proba.size()));
  for (Eigen::Index i = 0; i < proba.size(); ++i) {
    labels[static_cast<std::size_t>(i)] = proba(i) > 0.5 ? 1 : 0;
  }
  return labels;
}

}  // namespace cemaint

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "cemaint/cross_validation.hpp"
#include "cemaint/forest.hpp"
#include "cemaint/logistic.hpp"
#include "cemaint/metrics.hpp"
#include "cemaint/rng.hpp"
#include "oracles.hpp"

using namespace cemaint;

namespace {

// 40 rows, reference fit from statsmodels Logit.
void small_dataset(Eigen::MatrixXd& x, Eigen::VectorXd& y) {
  x.resize(40, 2);
  y.resize(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = 2 * std::sin(0.7 * i);
    x(i, 1) = std::cos(1.3 * i) + 0.1 * i / 40.0;
    y(i) = std::sin(0.7 * i) + 0.5 * std::cos(2.1 * i) + 0.9 * std::sin(5.1 * i) > 0 ? 1 : 0;
  }
}

Eigen::VectorXd constant_labels(int ones, int zeros) {
  Eigen::VectorXd y(ones + zeros);
  for (int i = 0; i < ones + zeros; ++i) y(i) = i < ones ? 1.0 : 0.0;
  return y;
}

}  // namespace

TEST_CASE("logistic fit matches statsmodels on a small dataset") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  small_dataset(x, y);
  REQUIRE(y.sum() == 21);
  const LogisticFit fit = fit_logistic(x, y, {"a", "b"});
  REQUIRE(fit.converged);
  const double coef[] = {-0.05892273545555128, 1.356985285002461, 0.7317312614323779};
  const double se[] = {0.43539177430930903, 0.3891796123546445, 0.63387221034566};
  const double p[] = {8.923488482281074e-01, 4.888658357170458e-04, 2.483432090584039e-01};
  const double lo[] = {-0.9122749322667886, 0.5942072612700984, -0.5106354416459131};
  const double hi[] = {0.794429461355686, 2.1197633087348238, 1.9740979645106689};
  REQUIRE(fit.estimates.size() == 3);
  CHECK(fit.estimates[0].term == "const");
  CHECK(fit.estimates[2].term == "b");
  for (int j = 0; j < 3; ++j) {
    CAPTURE(j);
    const auto& e = fit.estimates[static_cast<std::size_t>(j)];
    CHECK(e.coef == doctest::Approx(coef[j]).epsilon(1e-8));
    CHECK(e.std_err == doctest::Approx(se[j]).epsilon(1e-8));
    CHECK(e.p_value == doctest::Approx(p[j]).epsilon(1e-7));
    CHECK(e.ci_low == doctest::Approx(lo[j]).epsilon(1e-8));
    CHECK(e.ci_high == doctest::Approx(hi[j]).epsilon(1e-8));
  }
  CHECK(fit.log_likelihood == doctest::Approx(-16.824021889444005).epsilon(1e-10));
}

TEST_CASE("logistic fit agrees with the gradient-descent oracle") {
  const auto d = oracle::logistic_dataset();
  const LogisticFit fit = fit_logistic(d.x, d.y);
  const auto ref = oracle::gradient_descent_logit(d.x, d.y);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(fit.estimates[j].coef - ref.coef[j]) < 1e-5);
    CHECK(std::abs(fit.estimates[j].std_err - ref.std_err[j]) < 1e-5);
  }
}

TEST_CASE("intercept-only fit recovers the log odds") {
  const LogisticFit fit = fit_logistic(Eigen::MatrixXd(304, 0), constant_labels(174, 130));
  REQUIRE(fit.estimates.size() == 1);
  CHECK(std::abs(fit.estimates[0].coef - std::log(174.0 / 130.0)) < 1e-9);
  CHECK(fit.estimates[0].std_err == doctest::Approx(std::sqrt(1.0 / 174 + 1.0 / 130)));
}

TEST_CASE("logistic fit failure modes") {
  Eigen::MatrixXd x(6, 1);
  x << 1, 2, 3, 4, 5, 6;
  Eigen::VectorXd separable(6);
  separable << 0, 0, 0, 1, 1, 1;
  CHECK_THROWS_AS(fit_logistic(x, separable), SeparationError);
  CHECK_THROWS_AS(fit_logistic(x, Eigen::VectorXd::Ones(6)), DegenerateFoldError);
  CHECK_THROWS_AS(fit_logistic(Eigen::MatrixXd(1, 1), Eigen::VectorXd::Ones(1)),
                  PreconditionError);
  Eigen::MatrixXd collinear(6, 2);
  collinear.col(0) = x.col(0);
  collinear.col(1) = 2 * x.col(0);
  Eigen::VectorXd mixed(6);
  mixed << 0, 1, 0, 1, 1, 0;
  CHECK_THROWS_AS(fit_logistic(collinear, mixed), DegenerateFoldError);
}

TEST_CASE("predict_logistic") {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  small_dataset(x, y);
  const LogisticFit fit = fit_logistic(x, y);
  const Predictions p = predict_logistic(fit, x);
  const Eigen::VectorXd b = fit.coefficients();
  for (int i = 0; i < 40; ++i) {
    const double eta = b(0) + b(1) * x(i, 0) + b(2) * x(i, 1);
    CHECK(p.probability(i) == doctest::Approx(1.0 / (1.0 + std::exp(-eta))));
    CHECK(p.label[static_cast<std::size_t>(i)] == (p.probability(i) > 0.5 ? 1 : 0));
  }
  CHECK_THROWS_AS(predict_logistic(fit, Eigen::MatrixXd(3, 1)), PreconditionError);
}

TEST_CASE("normal helpers and coefficient output") {
  CHECK(two_sided_normal_p(kZ975) == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(two_sided_normal_p(0.0) == 1.0);
  CHECK(two_sided_normal_p(-1.0) == two_sided_normal_p(1.0));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) <= 1.0);

  const LogisticFit fit = fit_logistic(Eigen::MatrixXd(304, 0), constant_labels(174, 130));
  const std::string csv = format_coefficient_csv(fit);
  CHECK(csv.rfind(std::string(kCoefficientsHeader) + "\nconst,0.291521,", 0) == 0);
  CHECK(format_coefficient_table(fit).find("const") != std::string::npos);
}

TEST_CASE("metrics on a fixed confusion matrix") {
  std::vector<int> t, p;
  oracle::expand_confusion(3, 1, 2, 4, t, p);
  const ConfusionMatrix cm = confusion(t, p);
  CHECK(cm.tp == 3);
  CHECK(cm.fp == 1);
  CHECK(cm.fn == 2);
  CHECK(cm.tn == 4);
  CHECK(accuracy(cm) == doctest::Approx(0.7));
  CHECK(f1_score(cm) == doctest::Approx(2.0 / 3.0));
  CHECK(matthews_corrcoef(cm) == doctest::Approx(0.408248).epsilon(1e-6));
  CHECK(matthews_corrcoef(cm) == doctest::Approx(oracle::pearson(t, p)).epsilon(1e-12));
}

TEST_CASE("metric edge cases") {
  Warnings w;
  CHECK(f1_score(ConfusionMatrix{0, 0, 0, 5}) == 0.0);
  CHECK(matthews_corrcoef(ConfusionMatrix{0, 0, 0, 5}, &w) == 0.0);
  CHECK(w.size() == 1);
  CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), PreconditionError);
  const std::vector<int> ones{1, 1, 1};
  CHECK_FALSE(roc_auc(ones, std::vector<double>{0.1, 0.2, 0.3}, &w).has_value());
  CHECK(*roc_auc(std::vector<int>{0, 1}, std::vector<double>{0.5, 0.5}) == 0.5);
  CHECK(*roc_auc(std::vector<int>{0, 1}, std::vector<double>{0.9, 0.1}) == 0.0);
}

TEST_CASE("metrics agree with reference definitions on random data") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(derive_seed(99, seed));
    const std::size_t n = 20 + rng.index(200);
    std::vector<int> t(n), p(n);
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = rng.uniform() < 0.4 ? 1 : 0;
      p[i] = rng.uniform() < 0.5 ? t[i] : 1 - t[i];
      s[i] = std::round(rng.uniform() * 20) / 20;  // many ties
    }
    t[0] = 1;
    t[1] = 0;
    p[2] = 1 - p[3];
    const ConfusionMatrix cm = confusion(t, p);
    const double precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
    const double recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
    CHECK(f1_score(cm) == doctest::Approx(2 * precision * recall / (precision + recall)));
    CHECK(matthews_corrcoef(cm) == doctest::Approx(oracle::pearson(t, p)));
    CHECK(*roc_auc(t, s) == oracle::brute_force_auc(t, s));
  }
}

TEST_CASE("stratified folds follow the reference allocation") {
  // Expected test folds from scikit-learn's StratifiedKFold (no shuffle).
  const std::vector<int> a{1, 0, 1, 1, 0, 0, 1, 0, 1, 1, 1, 0, 1};
  CHECK(stratified_folds(a, 3) ==
        std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 2, 1, 1, 2, 2, 2});
  const std::vector<int> b{0, 0, 1, 2, 1, 0, 2, 2, 1, 0, 0, 1};
  CHECK(stratified_folds(b, 4) == std::vector<std::size_t>{0, 0, 0, 1, 1, 1, 2, 3, 2, 2, 3, 3});
  CHECK_THROWS_AS(stratified_folds(a, 1), PreconditionError);
  CHECK_THROWS_AS(stratified_folds(std::vector<int>{0, 1}, 3), PreconditionError);
}

TEST_CASE("shuffled stratified folds keep class balance") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    std::vector<int> y(50 + rng.index(300));
    for (auto& v : y) v = rng.uniform() < 0.35 ? 1 : 0;
    const std::size_t k = 2 + rng.index(9);
    const auto folds = stratified_folds(y, k, true, seed);
    CHECK(folds == stratified_folds(y, k, true, seed));
    std::vector<std::size_t> size(k, 0), pos(k, 0);
    for (std::size_t i = 0; i < y.size(); ++i) {
      REQUIRE(folds[i] < k);
      ++size[folds[i]];
      pos[folds[i]] += static_cast<std::size_t>(y[i]);
    }
    CHECK(*std::max_element(size.begin(), size.end()) - *std::min_element(size.begin(), size.end()) <= 1);
    CHECK(*std::max_element(pos.begin(), pos.end()) - *std::min_element(pos.begin(), pos.end()) <= 1);
  }
}

namespace {

std::vector<LabeledInstance> cv_instances(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledInstance> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = rng.normal();
    const auto lloc = static_cast<std::size_t>(std::max(1.0, std::round(std::exp(4 + z))));
    const double ce = std::exp(0.3 + 0.2 * rng.normal());
    const int label = rng.uniform() < 1.0 / (1.0 + std::exp(2.0 * z)) ? 1 : 0;
    out.push_back({"F" + std::to_string(i) + ".java", lloc, ce, label, Dimension::Ov});
  }
  return out;
}

}  // namespace

TEST_CASE("cross_validate is deterministic and averages fold metrics") {
  const auto inst = cv_instances(150, 3);
  for (Classifier k : kAllClassifiers) {
    CvOptions o;
    o.forest.n_trees = 20;
    const EvaluationReport a = cross_validate(inst, Dimension::Ov, FeatureSet::Both, k, o);
    const EvaluationReport b = cross_validate(inst, Dimension::Ov, FeatureSet::Both, k, o);
    REQUIRE(a.folds.size() == 10);
    double acc = 0, auc = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      CHECK(a.folds[f].acc == b.folds[f].acc);
      CHECK(*a.folds[f].roc_auc == *b.folds[f].roc_auc);
      acc += a.folds[f].acc;
      auc += *a.folds[f].roc_auc;
    }
    CHECK(a.summary.acc == doctest::Approx(acc / 10).epsilon(1e-15));
    CHECK(a.summary.roc_auc == doctest::Approx(auc / 10).epsilon(1e-15));
    CHECK(a.summary.acc > 0.6);  // lloc carries real signal here
  }
}

TEST_CASE("cross_validate preconditions") {
  auto inst = cv_instances(40, 5);
  for (auto& i : inst) i.label = 0;
  for (int i = 0; i < 5; ++i) inst[static_cast<std::size_t>(i)].label = 1;
  CHECK_THROWS_AS(cross_validate(inst, Dimension::Ov, FeatureSet::Lloc, Classifier::LogReg),
                  PreconditionError);
  CvOptions o;
  o.folds = 5;
  CHECK_NOTHROW(cross_validate(inst, Dimension::Ov, FeatureSet::Lloc, Classifier::LogReg, o));
}

TEST_CASE("global and per-fold scaling give identical logistic predictions") {
  // Standardization is an affine reparametrization for an unpenalized fit.
  const auto inst = cv_instances(120, 11);
  CvOptions per_fold, global;
  global.scaling = ScalingMode::Global;
  const auto a = cross_validate(inst, Dimension::Ov, FeatureSet::Both, Classifier::LogReg, per_fold);
  const auto b = cross_validate(inst, Dimension::Ov, FeatureSet::Both, Classifier::LogReg, global);
  CHECK(a.summary.acc == doctest::Approx(b.summary.acc));
  CHECK(a.summary.roc_auc == doctest::Approx(b.summary.roc_auc));
}

TEST_CASE("decision tree splits at midpoints") {
  Eigen::MatrixXd x(6, 1);
  x << 1, 2, 3, 10, 11, 12;
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  std::vector<std::size_t> samples(6);
  std::iota(samples.begin(), samples.end(), std::size_t{0});
  Rng rng(1);
  const DecisionTree tree = DecisionTree::fit(x, y, samples, ForestParams{}, rng);
  REQUIRE(tree.nodes().size() == 3);
  CHECK(tree.nodes()[0].feature == 0);
  CHECK(tree.nodes()[0].threshold == 6.5);
  CHECK(tree.depth() == 1);
  Eigen::RowVectorXd row(1);
  row << 6.5;
  CHECK(tree.predict_proba(row) == 0.0);  // <= threshold goes left
  row << 6.6;
  CHECK(tree.predict_proba(row) == 1.0);
}

TEST_CASE("tree depth limit and min_samples_split") {
  Rng data(4);
  Eigen::MatrixXd x(80, 2);
  std::vector<int> y(80);
  for (int i = 0; i < 80; ++i) {
    x(i, 0) = data.uniform();
    x(i, 1) = data.uniform();
    y[static_cast<std::size_t>(i)] = data.uniform() < 0.5 ? 1 : 0;
  }
  std::vector<std::size_t> samples(80);
  std::iota(samples.begin(), samples.end(), std::size_t{0});
  ForestParams p;
  p.max_depth = 3;
  Rng rng(2);
  CHECK(DecisionTree::fit(x, y, samples, p, rng).depth() <= 3);
  p.max_depth.reset();
  p.min_samples_split = 100;
  CHECK(DecisionTree::fit(x, y, samples, p, rng).nodes().size() == 1);
}

TEST_CASE("random forest behaviour") {
  Rng data(8);
  Eigen::MatrixXd x(120, 2);
  std::vector<int> y(120);
  for (int i = 0; i < 120; ++i) {
    x(i, 0) = data.normal();
    x(i, 1) = data.normal();
    y[static_cast<std::size_t>(i)] = x(i, 0) + 0.3 * data.normal() > 0 ? 1 : 0;
  }
  const RandomForest a = RandomForest::fit(x, y, ForestParams{}, 5);
  const RandomForest b = RandomForest::fit(x, y, ForestParams{}, 5);
  const RandomForest c = RandomForest::fit(x, y, ForestParams{}, 6);
  CHECK(a.tree_count() == 100);
  const Eigen::VectorXd pa = a.predict_proba(x);
  CHECK(pa == b.predict_proba(x));
  CHECK(pa != c.predict_proba(x));
  CHECK(pa.minCoeff() >= 0.0);
  CHECK(pa.maxCoeff() <= 1.0);
  const auto labels = a.predict(x);
  int correct = 0;
  for (std::size_t i = 0; i < 120; ++i) {
    CHECK(labels[i] == (pa(static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0));
    correct += labels[i] == y[i];
  }
  CHECK(correct > 110);  // training fit of fully grown trees

  // Without bootstrap and with every feature considered, trees coincide.
  ForestParams fixed;
  fixed.bootstrap = false;
  fixed.max_features = 2;
  fixed.n_trees = 5;
  const RandomForest d = RandomForest::fit(x, y, fixed, 1);
  for (const auto& t : d.trees()) CHECK(t.nodes().size() == d.trees()[0].nodes().size());

  Warnings w;
  const RandomForest single = RandomForest::fit(x, std::vector<int>(120, 1), ForestParams{}, 1, &w);
  CHECK(w.size() == 1);
  CHECK(single.predict(x) == std::vector<int>(120, 1));
}

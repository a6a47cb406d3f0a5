#include "cemaint/logistic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "cemaint/csv.hpp"

namespace cemaint {

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double two_sided_normal_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

namespace {

// log(1 + exp(eta)) without overflow.
double softplus(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double log_likelihood(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = design * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - softplus(eta(i));
  return ll;
}

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd design(x.rows(), x.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(x.cols()) = x;
  return design;
}

}  // namespace

Eigen::VectorXd LogisticFit::coefficients() const {
  Eigen::VectorXd beta(static_cast<Eigen::Index>(estimates.size()));
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    beta(static_cast<Eigen::Index>(i)) = estimates[i].coef;
  }
  return beta;
}

const CoefficientEstimate& LogisticFit::term(std::string_view name) const {
  for (const auto& e : estimates) {
    if (e.term == name) return e;
  }
  throw std::out_of_range("no term '" + std::string(name) + "' in logistic fit");
}

LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::vector<std::string>& feature_names,
                         const LogisticOptions& options) {
  const Eigen::Index n = x.rows();
  if (n < 2) throw PreconditionError("logistic fit needs at least 2 rows");
  if (y.size() != n) throw PreconditionError("label count differs from row count");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != x.cols()) {
    throw PreconditionError("feature name count differs from column count");
  }
  const double positives = y.sum();
  if (positives <= 0.0 || positives >= static_cast<double>(n)) {
    throw DegenerateFoldError("logistic fit needs both classes; got a single-class target");
  }

  const Eigen::MatrixXd design = with_intercept(x);
  const Eigen::Index k = design.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  LogisticFit fit;

  Eigen::VectorXd p(n);
  auto update_probabilities = [&] {
    const Eigen::VectorXd eta = design * beta;
    for (Eigen::Index i = 0; i < n; ++i) p(i) = sigmoid(eta(i));
  };
  auto information = [&] {
    const Eigen::VectorXd w = p.array() * (1.0 - p.array());
    return Eigen::MatrixXd(design.transpose() * w.asDiagonal() * design);
  };

  double ll = log_likelihood(design, y, beta);
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    update_probabilities();
    const Eigen::VectorXd score = design.transpose() * (y - p);
    if (score.cwiseAbs().maxCoeff() < options.score_tolerance) {
      fit.converged = true;
      fit.iterations = iter;
      break;
    }
    if (iter == options.max_iterations) {
      fit.iterations = iter;
      break;
    }
    const Eigen::LDLT<Eigen::MatrixXd> solver(information());
    if (solver.info() != Eigen::Success || !solver.isPositive()) {
      throw DegenerateFoldError("singular information matrix in logistic fit");
    }
    const Eigen::VectorXd step = solver.solve(score);

    double t = 1.0;
    Eigen::VectorXd candidate = beta + step;
    double candidate_ll = log_likelihood(design, y, candidate);
    // Near the optimum the likelihood change drowns in rounding; only halve
    // on a real decrease.
    const double slack = 1e-12 * (1.0 + std::abs(ll));
    while (candidate_ll < ll - slack && t > 1e-10) {
      t *= 0.5;
      candidate = beta + t * step;
      candidate_ll = log_likelihood(design, y, candidate);
    }
    beta = candidate;
    ll = candidate_ll;
    if (beta.cwiseAbs().maxCoeff() > options.separation_bound) {
      throw SeparationError("separation: logistic coefficients diverge (|coef| > " +
                            csv::fixed(options.separation_bound, 0) + ")");
    }
  }

  update_probabilities();
  if ((y - p).cwiseAbs().maxCoeff() < 1e-6) {
    throw SeparationError("separation: fitted probabilities reproduce the labels exactly");
  }

  const Eigen::LDLT<Eigen::MatrixXd> solver(information());
  if (solver.info() != Eigen::Success || !solver.isPositive()) {
    throw DegenerateFoldError("singular information matrix at the logistic optimum");
  }
  const Eigen::MatrixXd covariance = solver.solve(Eigen::MatrixXd::Identity(k, k));

  fit.log_likelihood = ll;
  for (Eigen::Index j = 0; j < k; ++j) {
    CoefficientEstimate e;
    e.term = j == 0 ? "const"
             : feature_names.empty()
                 ? "x" + std::to_string(j)
                 : feature_names[static_cast<std::size_t>(j - 1)];
    e.coef = beta(j);
    e.std_err = std::sqrt(covariance(j, j));
    e.z = e.coef / e.std_err;
    e.p_value = two_sided_normal_p(e.z);
    e.ci_low = e.coef - kZ975 * e.std_err;
    e.ci_high = e.coef + kZ975 * e.std_err;
    fit.estimates.push_back(std::move(e));
  }
  return fit;
}

LogisticFit fit_logistic(const FeatureMatrix& x, const Eigen::VectorXd& y,
                         const LogisticOptions& options) {
  return fit_logistic(x.values, y, x.columns, options);
}

Predictions predict_logistic(const LogisticFit& fit, const Eigen::MatrixXd& x) {
  if (!fit.converged) throw PreconditionError("predict_logistic needs a converged fit");
  if (static_cast<std::size_t>(x.cols()) + 1 != fit.estimates.size()) {
    throw PreconditionError("feature count mismatch: fit has " +
                            std::to_string(fit.estimates.size() - 1) + " feature(s), input has " +
                            std::to_string(x.cols()));
  }
  const Eigen::VectorXd beta = fit.coefficients();
  const Eigen::VectorXd eta = (x * beta.tail(x.cols())).array() + beta(0);
  Predictions out;
  out.probability.resize(x.rows());
  out.label.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    out.probability(i) = sigmoid(eta(i));
    out.label[static_cast<std::size_t>(i)] = out.probability(i) > 0.5 ? 1 : 0;
  }
  return out;
}

std::string format_coefficient_table(const LogisticFit& fit) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-12s %10s %9s %9s %9s %9s %9s\n", "", "coef", "std err",
                "z", "P>|z|", "[0.025", "0.975]");
  out << line;
  for (const auto& e : fit.estimates) {
    std::snprintf(line, sizeof line, "%-12s %10.4f %9.3f %9.3f %9.3f %9.3f %9.3f\n",
                  e.term.c_str(), e.coef, e.std_err, e.z, e.p_value, e.ci_low, e.ci_high);
    out << line;
  }
  return out.str();
}

std::string format_coefficient_csv(const LogisticFit& fit) {
  std::ostringstream out;
  out << kCoefficientsHeader << '\n';
  for (const auto& e : fit.estimates) {
    out << e.term << ',' << csv::fixed(e.coef) << ',' << csv::fixed(e.std_err) << ','
        << csv::fixed(e.z) << ',' << csv::fixed(e.p_value) << ',' << csv::fixed(e.ci_low) << ','
        << csv::fixed(e.ci_high) << '\n';
  }
  return out.str();
}

}  // namespace cemaint

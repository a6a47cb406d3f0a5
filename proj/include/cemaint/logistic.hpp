#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cemaint/features.hpp"

namespace cemaint {

/// Two-sided 97.5% standard normal quantile.
inline constexpr double kZ975 = 1.959963984540054;

struct CoefficientEstimate {
  std::string term;
  double coef = 0.0;
  double std_err = 0.0;
  double z = 0.0;
  double p_value = 1.0;  // two-sided, standard normal
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct LogisticFit {
  std::vector<CoefficientEstimate> estimates;  // "const" first, then features
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;

  Eigen::VectorXd coefficients() const;
  /// Throws std::out_of_range for an unknown term.
  const CoefficientEstimate& term(std::string_view name) const;
};

struct LogisticOptions {
  double score_tolerance = 1e-8;  // max |X'(y - p)|
  int max_iterations = 100;
  double separation_bound = 1e4;  // |coef| beyond this means divergence
};

/// Unpenalized maximum-likelihood logistic regression with an intercept,
/// fitted by Newton-Raphson (IRLS) with step halving. Standard errors come
/// from the inverse observed information at the optimum (Wald).
///
/// `x` holds feature columns only; it may have zero columns (intercept-only
/// model). Throws PreconditionError for fewer than 2 rows,
/// DegenerateFoldError for single-class `y` or a singular information
/// matrix, and SeparationError when the coefficients diverge.
LogisticFit fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const std::vector<std::string>& feature_names = {},
                         const LogisticOptions& options = {});

LogisticFit fit_logistic(const FeatureMatrix& x, const Eigen::VectorXd& y,
                         const LogisticOptions& options = {});

struct Predictions {
  Eigen::VectorXd probability;
  std::vector<int> label;  // probability > 0.5
};

Predictions predict_logistic(const LogisticFit& fit, const Eigen::MatrixXd& x);

/// P(|Z| > |z|) for standard normal Z.
double two_sided_normal_p(double z);

double sigmoid(double eta);

/// Plain-text table with coef, std err, z, P>|z| and the 95% interval.
std::string format_coefficient_table(const LogisticFit& fit);

inline constexpr std::string_view kCoefficientsHeader = "term,coef,std_err,z,p,ci_low,ci_high";
std::string format_coefficient_csv(const LogisticFit& fit);

}  // namespace cemaint

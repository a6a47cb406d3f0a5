#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cemaint/features.hpp"
#include "cemaint/logistic.hpp"

namespace cemaint {

/// LLOC quartile bins: [min, Q1], (Q1, Q2], (Q2, Q3], (Q3, max].
struct StratificationScheme {
  double min = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t n_strata = 4;          // 1 when every value is equal
  std::vector<std::size_t> stratum;  // per instance, in input order
};

/// Quantile of sorted data by linear interpolation between order
/// statistics at position (n - 1) * p.
double linear_quantile(std::span<const double> sorted, double p);

/// Throws PreconditionError for fewer than 4 values.
StratificationScheme quartile_strata(std::span<const double> lloc, Warnings* warnings = nullptr);

enum class Conditioning {
  Marginal,   // label ~ log ce
  Covariate,  // label ~ log ce + log lloc
};

struct AssociationEntry {
  bool estimable = false;
  std::string reason;  // why not estimable
  std::size_t n = 0;
  std::size_t positives = 0;
  std::optional<CoefficientEstimate> ce;    // log_ce coefficient
  std::optional<CoefficientEstimate> lloc;  // log_lloc coefficient (Covariate only)
  std::optional<double> lloc_low;   // stratum bounds, per-stratum entries only
  std::optional<double> lloc_high;
};

/// Logistic association between standardized log ce and the label. The
/// subset's own statistics are used for standardization.
AssociationEntry association(std::span<const LabeledInstance> instances,
                             Conditioning conditioning);

struct AssociationReport {
  std::string model_id;
  AssociationEntry marginal;
  AssociationEntry conditional;
  std::vector<AssociationEntry> per_stratum;
  StratificationScheme strata;
  bool reversal = false;
  std::string narrative;
};

struct ReversalVerdict {
  bool reversal = false;
  std::string narrative;
};

/// A reversal needs estimable marginal and conditional entries whose ce
/// coefficients differ in sign with both 95% intervals excluding zero.
ReversalVerdict detect_reversal(const AssociationReport& report);

/// Marginal, covariate-conditional and per-stratum associations plus the
/// reversal verdict for one model's instances.
AssociationReport analyze_association(const std::string& model_id,
                                      std::span<const LabeledInstance> instances,
                                      Warnings* warnings = nullptr);

/// Models whose conditional ce coefficient disagrees in sign with the
/// majority. A tied majority flags nothing (with a warning); models whose
/// conditional entry is inestimable are ignored. Throws PreconditionError for
/// fewer than 2 reports.
std::vector<std::string> flag_inverted_models(std::span<const AssociationReport> reports,
                                              Warnings* warnings = nullptr);

/// Synthetic confounded corpus: log-normal LLOC, cross-entropy falling with
/// log LLOC plus noise, and a label whose log-odds fall with both log LLOC
/// and the cross-entropy residual. The ce -> label association is positive
/// marginally and negative once LLOC is controlled for. Throws
/// PreconditionError for n < 200.
std::vector<LabeledInstance> generate_simpson_corpus(std::uint64_t seed, std::size_t n);

}  // namespace cemaint

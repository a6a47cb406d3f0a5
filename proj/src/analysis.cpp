#include "cemaint/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "cemaint/rng.hpp"

namespace cemaint {

double linear_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw PreconditionError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

StratificationScheme quartile_strata(std::span<const double> lloc, Warnings* warnings) {
  if (lloc.size() < 4) throw PreconditionError("quartile stratification needs >= 4 values");
  std::vector<double> sorted(lloc.begin(), lloc.end());
  std::sort(sorted.begin(), sorted.end());

  StratificationScheme scheme;
  scheme.min = sorted.front();
  scheme.max = sorted.back();
  scheme.q1 = linear_quantile(sorted, 0.25);
  scheme.q2 = linear_quantile(sorted, 0.50);
  scheme.q3 = linear_quantile(sorted, 0.75);
  scheme.stratum.resize(lloc.size(), 0);
  if (scheme.min == scheme.max) {
    scheme.n_strata = 1;
    warn(warnings, "all LLOC values equal; using a single stratum");
    return scheme;
  }
  for (std::size_t i = 0; i < lloc.size(); ++i) {
    const double v = lloc[i];
    scheme.stratum[i] = v <= scheme.q1 ? 0 : v <= scheme.q2 ? 1 : v <= scheme.q3 ? 2 : 3;
  }
  return scheme;
}

AssociationEntry association(std::span<const LabeledInstance> instances,
                             Conditioning conditioning) {
  AssociationEntry entry;
  entry.n = instances.size();
  for (const auto& inst : instances) entry.positives += inst.label == 1 ? 1 : 0;
  if (entry.positives == 0 || entry.positives == entry.n) {
    entry.reason = "single-class subset";
    return entry;
  }
  const FeatureSet features =
      conditioning == Conditioning::Marginal ? FeatureSet::Ce : FeatureSet::Both;
  try {
    const FeatureMatrix fm = build_features(instances, features, ScalingMode::Global);
    const LogisticFit fit = fit_logistic(fm, label_vector(instances));
    if (!fit.converged) {
      entry.reason = "logistic fit did not converge";
      return entry;
    }
    entry.ce = fit.term("log_ce");
    if (conditioning == Conditioning::Covariate) entry.lloc = fit.term("log_lloc");
    entry.estimable = true;
  } catch (const Error& e) {
    entry.reason = e.what();
  }
  return entry;
}

namespace {

bool excludes_zero(const CoefficientEstimate& e) { return e.ci_low > 0.0 || e.ci_high < 0.0; }

std::string describe_coef(const CoefficientEstimate& e) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%+.4f [%.3f, %.3f]", e.coef, e.ci_low, e.ci_high);
  return buf;
}

}  // namespace

ReversalVerdict detect_reversal(const AssociationReport& report) {
  ReversalVerdict verdict;
  const std::string who = report.model_id.empty() ? "" : report.model_id + ": ";
  if (!report.marginal.estimable || !report.conditional.estimable) {
    verdict.narrative = who + "no verdict; " +
                        (!report.marginal.estimable ? "marginal association inestimable ("
                                                          + report.marginal.reason + ")"
                                                    : "conditional association inestimable (" +
                                                          report.conditional.reason + ")");
    return verdict;
  }
  const CoefficientEstimate& m = *report.marginal.ce;
  const CoefficientEstimate& c = *report.conditional.ce;
  const bool opposite = (m.coef > 0.0 && c.coef < 0.0) || (m.coef < 0.0 && c.coef > 0.0);
  verdict.reversal = opposite && excludes_zero(m) && excludes_zero(c);
  if (verdict.reversal) {
    verdict.narrative = who + "cross-entropy association reverses when controlling for LLOC: "
                        "marginal " + describe_coef(m) + ", conditional " + describe_coef(c) +
                        " (LLOC is a likely confounder)";
  } else if (opposite) {
    verdict.narrative = who + "signs differ (marginal " + describe_coef(m) + ", conditional " +
                        describe_coef(c) + ") but an interval includes zero; no reversal";
  } else {
    verdict.narrative = who + "no reversal: marginal " + describe_coef(m) + ", conditional " +
                        describe_coef(c);
  }
  return verdict;
}

AssociationReport analyze_association(const std::string& model_id,
                                      std::span<const LabeledInstance> instances,
                                      Warnings* warnings) {
  AssociationReport report;
  report.model_id = model_id;
  report.marginal = association(instances, Conditioning::Marginal);
  report.conditional = association(instances, Conditioning::Covariate);

  std::vector<double> lloc;
  lloc.reserve(instances.size());
  for (const auto& inst : instances) lloc.push_back(static_cast<double>(inst.lloc));
  report.strata = quartile_strata(lloc, warnings);

  const StratificationScheme& s = report.strata;
  const double bounds[5] = {s.min, s.q1, s.q2, s.q3, s.max};
  for (std::size_t k = 0; k < s.n_strata; ++k) {
    std::vector<LabeledInstance> subset;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (s.stratum[i] == k) subset.push_back(instances[i]);
    }
    AssociationEntry entry;
    if (subset.size() < 2) {
      entry.n = subset.size();
      entry.reason = "fewer than 2 instances in stratum";
    } else {
      entry = association(subset, Conditioning::Marginal);
    }
    entry.lloc_low = s.n_strata == 1 ? s.min : bounds[k];
    entry.lloc_high = s.n_strata == 1 ? s.max : bounds[k + 1];
    report.per_stratum.push_back(std::move(entry));
  }

  const ReversalVerdict verdict = detect_reversal(report);
  report.reversal = verdict.reversal;
  report.narrative = verdict.narrative;
  return report;
}

std::vector<std::string> flag_inverted_models(std::span<const AssociationReport> reports,
                                              Warnings* warnings) {
  if (reports.size() < 2) throw PreconditionError("inverted-model check needs >= 2 models");
  std::size_t positive = 0, negative = 0;
  for (const auto& r : reports) {
    if (!r.conditional.estimable) continue;
    if (r.conditional.ce->coef > 0.0) ++positive;
    if (r.conditional.ce->coef < 0.0) ++negative;
  }
  if (positive == negative) {
    warn(warnings, "no majority sign among conditional cross-entropy coefficients");
    return {};
  }
  const bool majority_positive = positive > negative;
  std::vector<std::string> flagged;
  for (const auto& r : reports) {
    if (!r.conditional.estimable) continue;
    const double coef = r.conditional.ce->coef;
    if ((majority_positive && coef < 0.0) || (!majority_positive && coef > 0.0)) {
      flagged.push_back(r.model_id);
    }
  }
  return flagged;
}

std::vector<LabeledInstance> generate_simpson_corpus(std::uint64_t seed, std::size_t n) {
  if (n < 200) throw PreconditionError("synthetic corpus needs n >= 200");
  constexpr double kLogLlocMean = 4.0;
  constexpr double kLogLlocSd = 1.3;
  constexpr double kCeIntercept = 0.35;  // log ce at the mean log LLOC
  constexpr double kCeSlope = -0.25;     // per unit log LLOC
  constexpr double kCeNoise = 0.25;
  constexpr double kLabelIntercept = 0.4;
  constexpr double kLabelLlocSlope = -1.5;   // per unit log LLOC
  constexpr double kLabelResidSlope = -2.5;  // per unit ce residual

  Rng rng(derive_seed(seed, 0x51A750ULL));
  std::vector<LabeledInstance> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double log_lloc_draw = kLogLlocMean + kLogLlocSd * rng.normal();
    const auto lloc = static_cast<std::size_t>(std::max(1.0, std::round(std::exp(log_lloc_draw))));
    const double centered = std::log(static_cast<double>(lloc)) - kLogLlocMean;
    const double residual = kCeNoise * rng.normal();
    const double log_ce = kCeIntercept + kCeSlope * centered + residual;
    const double logit = kLabelIntercept + kLabelLlocSlope * centered + kLabelResidSlope * residual;
    const int label = rng.uniform() < sigmoid(logit) ? 1 : 0;

    char id[32];
    std::snprintf(id, sizeof id, "Synthetic%05zu.java", i);
    out.push_back(LabeledInstance{id, lloc, std::exp(log_ce), label, Dimension::Ov});
  }
  return out;
}

}  // namespace cemaint

#pragma once

#include "lobbench/model.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace lobbench {

struct WilcoxonResult {
    int n = 0;         // pairs left after dropping exact zeros
    double w = 0.0;    // sum of ranks of positive differences
    double p = 1.0;    // one-sided, alternative "median difference > 0"
    bool exact = true;
    std::string diagnostic;
};

// Signed-rank test with average ranks for ties. For n <= 25 the p-value counts
// sign assignments exactly (tie-aware); beyond that it uses the normal
// approximation with continuity and tie corrections. All-zero input yields
// p = 1 with a diagnostic.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs);

constexpr int kWilcoxonExactMax = 25;

// Benjamini-Hochberg step-up adjustment, in input order. Throws ParameterError
// on p outside [0, 1].
std::vector<double> fdr_adjust(std::span<const double> raw_p);

struct ImportanceReport {
    std::vector<FeatureId> features;
    Eigen::MatrixXd fraction;  // features x 3: share of models with a nonzero coefficient
    int models = 0;
    double threshold = 0.8;

    bool high_impact(Eigen::Index feature, int cls) const { return fraction(feature, cls) >= threshold; }
};

// Selection frequency over ENet models. Features are the sorted union over the
// models; a model without a feature counts as not selecting it (the FPC count
// can differ between fits). Throws ParameterError for SVM models or an empty
// set.
ImportanceReport importance(std::span<const TrainedModel* const> models, double threshold = 0.8);

struct HighImpactCounts {
    std::vector<FeatureId> features;  // sorted union over the reports
    Eigen::MatrixXi counts;           // features x 3
};

// Per (feature, class): number of reports (stocks) flagging the pair as high
// impact.
HighImpactCounts high_impact_counts(std::span<const ImportanceReport> reports);

}  // namespace lobbench

#pragma once

#include "lobbench/features.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace lobbench {

// Box-plot winsorization bounds and post-winsorization moments of one column,
// all taken from the training sample.
struct ColumnSummary {
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double mean = 0.0;
    double stddev = 0.0;  // sample (n-1) standard deviation; 0 flags a constant column
};

struct ColumnStats {
    std::vector<FeatureId> features;
    std::vector<ColumnSummary> columns;

    const ColumnSummary& at(FeatureId id) const;  // throws ParameterError
};

// Type-7 quantile (linear interpolation between order statistics) of an
// ascending-sorted sample.
double quantile_sorted(std::span<const double> sorted, double p);

ColumnStats fit_stats(const Dataset& train);

// Clamp to [lower, upper] then z-score. A zero stddev column maps to 0. The
// result is flagged `standardized` and may not be transformed again.
Dataset transform(const Dataset& rows, const ColumnStats& stats);

// JSON array of per-column objects (feature name plus every summary field).
std::string stats_to_json(const ColumnStats& stats);
ColumnStats stats_from_json(const std::string& text);

// ---------------------------------------------------------------------------
// Stratified sampling
// ---------------------------------------------------------------------------
struct SamplingPlan {
    Eigen::Index train_size = 8000;
    Eigen::Index test_size = 2000;
    std::array<double, kNumClasses> ratio = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // Downwards, Stationary, Upwards
    std::uint64_t seed = 0;

    void validate() const;
};

struct SampleSplit {
    std::vector<Eigen::Index> train;  // ascending
    std::vector<Eigen::Index> test;   // ascending
};

// Per-class train counts: floor(ratio * size), with the remaining units given
// to the largest fractional parts (ties to the earlier class).
std::array<Eigen::Index, kNumClasses> class_quotas(Eigen::Index size, const std::array<double, kNumClasses>& ratio);

// Label-balanced subset drawn without replacement from `candidates` (all rows
// when empty). Throws ShortageError naming the short class.
std::vector<Eigen::Index> stratified_subset(std::span<const Label> labels, Eigen::Index size,
                                            const std::array<double, kNumClasses>& ratio, std::uint64_t seed,
                                            std::span<const Eigen::Index> candidates = {});

// Train: stratified per the plan. Test: uniform over the remaining rows.
SampleSplit stratified_sample(std::span<const Label> labels, const SamplingPlan& plan);

class ShortageError : public DataError {
public:
    ShortageError(Label cls, Eigen::Index needed, Eigen::Index available);
    Label label;
};

}  // namespace lobbench

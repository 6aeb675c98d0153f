#pragma once

#include "lobbench/core.hpp"

#include <Eigen/Core>

#include <array>
#include <span>

namespace lobbench {

// 3x3 confusion table, rows = actual class, columns = predicted class.
struct ConfusionCounts {
    Eigen::Matrix<std::int64_t, kNumClasses, kNumClasses> table = decltype(table)::Zero();

    std::int64_t tp(Label c) const { return table(class_index(c), class_index(c)); }
    std::int64_t fp(Label c) const { return table.col(class_index(c)).sum() - tp(c); }
    std::int64_t fn(Label c) const { return table.row(class_index(c)).sum() - tp(c); }
    std::int64_t total() const { return table.sum(); }
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Zero denominators: the value is reported as 0 and flagged.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
};

struct MetricsReport {
    std::array<ClassMetrics, kNumClasses> per_class;
    ClassMetrics macro;  // unweighted mean over the three classes
    ConfusionCounts counts;
};

MetricsReport score(std::span<const Label> predicted, std::span<const Label> actual);
MetricsReport metrics_from_counts(const ConfusionCounts& counts);

}  // namespace lobbench

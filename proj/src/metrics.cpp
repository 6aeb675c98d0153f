#include "lobbench/metrics.hpp"

#include <string>

namespace lobbench {

MetricsReport score(std::span<const Label> predicted, std::span<const Label> actual) {
    if (predicted.size() != actual.size())
        throw ParameterError("score: " + std::to_string(predicted.size()) + " predictions for " +
                             std::to_string(actual.size()) + " labels");
    if (actual.empty()) throw ParameterError("score: nothing to score");

    ConfusionCounts counts;
    for (std::size_t i = 0; i < actual.size(); ++i) ++counts.table(class_index(actual[i]), class_index(predicted[i]));
    return metrics_from_counts(counts);
}

MetricsReport metrics_from_counts(const ConfusionCounts& counts) {
    MetricsReport report;
    report.counts = counts;
    for (auto c : kAllLabels) {
        auto& m = report.per_class[class_index(c)];
        const auto tp = static_cast<double>(report.counts.tp(c));
        const auto fp = static_cast<double>(report.counts.fp(c));
        const auto fn = static_cast<double>(report.counts.fn(c));
        m.precision_undefined = tp + fp == 0.0;
        m.recall_undefined = tp + fn == 0.0;
        m.precision = m.precision_undefined ? 0.0 : tp / (tp + fp);
        m.recall = m.recall_undefined ? 0.0 : tp / (tp + fn);
        m.f1_undefined = m.precision + m.recall == 0.0;
        m.f1 = m.f1_undefined ? 0.0 : 2.0 * m.recall * m.precision / (m.recall + m.precision);

        report.macro.precision += m.precision;
        report.macro.recall += m.recall;
        report.macro.f1 += m.f1;
        report.macro.precision_undefined |= m.precision_undefined;
        report.macro.recall_undefined |= m.recall_undefined;
        report.macro.f1_undefined |= m.f1_undefined;
    }
    report.macro.precision /= kNumClasses;
    report.macro.recall /= kNumClasses;
    report.macro.f1 /= kNumClasses;
    return report;
}

}  // namespace lobbench

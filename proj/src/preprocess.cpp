#include "lobbench/preprocess.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace lobbench {

ShortageError::ShortageError(Label cls, Eigen::Index needed, Eigen::Index available)
    : DataError("stratified sample: class " + std::string(to_string(cls)) + " needs " + std::to_string(needed) +
                " rows but only " + std::to_string(available) + " are available"),
      label(cls) {}

const ColumnSummary& ColumnStats::at(FeatureId id) const {
    for (std::size_t c = 0; c < features.size(); ++c)
        if (features[c] == id) return columns[c];
    throw ParameterError("column stats have no entry for " + id.name());
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ParameterError("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ColumnStats fit_stats(const Dataset& train) {
    train.validate();
    if (train.rows() < 2) throw ParameterError("fit_stats: need at least two rows");
    ColumnStats stats;
    stats.features = train.features;
    std::vector<double> col(static_cast<std::size_t>(train.rows()));
    for (Eigen::Index c = 0; c < train.cols(); ++c) {
        Eigen::Map<Eigen::VectorXd>(col.data(), train.rows()) = train.x.col(c);
        std::sort(col.begin(), col.end());
        ColumnSummary s;
        s.q1 = quantile_sorted(col, 0.25);
        s.q3 = quantile_sorted(col, 0.75);
        s.iqr = s.q3 - s.q1;
        s.lower = s.q1 - 1.5 * s.iqr;
        s.upper = s.q3 + 1.5 * s.iqr;

        const Eigen::ArrayXd w = train.x.col(c).array().max(s.lower).min(s.upper);
        s.mean = w.mean();
        const double ss = (w - s.mean).square().sum();
        s.stddev = std::sqrt(ss / static_cast<double>(w.size() - 1));
        stats.columns.push_back(s);
    }
    return stats;
}

Dataset transform(const Dataset& rows, const ColumnStats& stats) {
    if (rows.standardized) throw ParameterError("transform: rows are already standardized");
    Dataset out = rows;
    for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        const auto& s = stats.at(rows.features[static_cast<std::size_t>(c)]);
        auto col = out.x.col(c).array();
        if (s.stddev > 0.0)
            col = (col.max(s.lower).min(s.upper) - s.mean) / s.stddev;
        else
            col = 0.0;
    }
    out.standardized = true;
    return out;
}

std::string stats_to_json(const ColumnStats& stats) {
    auto cols = nlohmann::json::array();
    for (std::size_t c = 0; c < stats.features.size(); ++c) {
        const auto& s = stats.columns[c];
        cols.push_back({{"feature", stats.features[c].name()},
                        {"q1", s.q1},
                        {"q3", s.q3},
                        {"iqr", s.iqr},
                        {"lower", s.lower},
                        {"upper", s.upper},
                        {"mean", s.mean},
                        {"stddev", s.stddev}});
    }
    return cols.dump();
}

ColumnStats stats_from_json(const std::string& text) {
    try {
        ColumnStats stats;
        for (const auto& c : nlohmann::json::parse(text)) {
            stats.features.push_back(FeatureId::parse(c.at("feature").get<std::string>()));
            ColumnSummary s;
            s.q1 = c.at("q1").get<double>();
            s.q3 = c.at("q3").get<double>();
            s.iqr = c.at("iqr").get<double>();
            s.lower = c.at("lower").get<double>();
            s.upper = c.at("upper").get<double>();
            s.mean = c.at("mean").get<double>();
            s.stddev = c.at("stddev").get<double>();
            stats.columns.push_back(s);
        }
        return stats;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("column stats: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

void SamplingPlan::validate() const {
    if (train_size <= 0 || test_size <= 0) throw ParameterError("sampling plan: sizes must be positive");
    double sum = 0.0;
    for (double r : ratio) {
        if (!(r >= 0.0)) throw ParameterError("sampling plan: proportions must be >= 0");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ParameterError("sampling plan: proportions must sum to 1");
}

std::array<Eigen::Index, kNumClasses> class_quotas(Eigen::Index size, const std::array<double, kNumClasses>& ratio) {
    std::array<Eigen::Index, kNumClasses> quota{};
    std::array<double, kNumClasses> frac{};
    Eigen::Index assigned = 0;
    for (int c = 0; c < kNumClasses; ++c) {
        const double exact = ratio[c] * static_cast<double>(size);
        quota[c] = static_cast<Eigen::Index>(std::floor(exact));
        frac[c] = exact - static_cast<double>(quota[c]);
        assigned += quota[c];
    }
    std::array<int, kNumClasses> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
    for (int i = 0; assigned < size; i = (i + 1) % kNumClasses, ++assigned) ++quota[order[i]];
    return quota;
}

namespace {

template <typename Rng>
void fisher_yates(std::vector<Eigen::Index>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(v[i - 1], v[pick(rng)]);
    }
}

}  // namespace

std::vector<Eigen::Index> stratified_subset(std::span<const Label> labels, Eigen::Index size,
                                            const std::array<double, kNumClasses>& ratio, std::uint64_t seed,
                                            std::span<const Eigen::Index> candidates) {
    const auto quota = class_quotas(size, ratio);
    std::array<std::vector<Eigen::Index>, kNumClasses> by_class;
    auto add = [&](Eigen::Index r) { by_class[class_index(labels[static_cast<std::size_t>(r)])].push_back(r); };
    if (candidates.empty())
        for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(labels.size()); ++r) add(r);
    else
        for (auto r : candidates) add(r);

    for (int c = 0; c < kNumClasses; ++c)
        if (static_cast<Eigen::Index>(by_class[c].size()) < quota[c])
            throw ShortageError(label_from_index(c), quota[c], static_cast<Eigen::Index>(by_class[c].size()));

    std::mt19937_64 rng(seed);
    std::vector<Eigen::Index> out;
    out.reserve(static_cast<std::size_t>(size));
    for (int c = 0; c < kNumClasses; ++c) {
        fisher_yates(by_class[c], rng);
        out.insert(out.end(), by_class[c].begin(), by_class[c].begin() + quota[c]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

SampleSplit stratified_sample(std::span<const Label> labels, const SamplingPlan& plan) {
    plan.validate();
    SampleSplit split;
    split.train = stratified_subset(labels, plan.train_size, plan.ratio, plan.seed);

    std::vector<Eigen::Index> rest;
    rest.reserve(labels.size() - split.train.size());
    std::size_t t = 0;
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(labels.size()); ++r) {
        if (t < split.train.size() && split.train[t] == r) {
            ++t;
            continue;
        }
        rest.push_back(r);
    }
    if (static_cast<Eigen::Index>(rest.size()) < plan.test_size)
        throw DataError("stratified sample: " + std::to_string(rest.size()) + " rows left for a test set of " +
                        std::to_string(plan.test_size));
    std::mt19937_64 rng(derive_seed(plan.seed, 0x7e57));
    fisher_yates(rest, rng);
    split.test.assign(rest.begin(), rest.begin() + plan.test_size);
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace lobbench

#include "lobbench/preprocess.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <set>

using namespace lobbench;

namespace {

Dataset labeled_data(int n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Dataset d;
    for (int j = 1; j <= p; ++j) d.features.push_back(FeatureId::v(j));
    d.x.resize(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) d.x(i, j) = z(rng) * (j + 1) + (rng() % 50 == 0 ? 40.0 : 0.0);
        d.y.push_back(label_from_index(static_cast<int>(rng() % 3)));
        d.keys.push_back({1, i + 3});
    }
    return d;
}

bool bit_identical(const ColumnStats& a, const ColumnStats& b) {
    if (a.features != b.features || a.columns.size() != b.columns.size()) return false;
    for (std::size_t c = 0; c < a.columns.size(); ++c)
        if (std::memcmp(&a.columns[c], &b.columns[c], sizeof(ColumnSummary)) != 0) return false;
    return true;
}

}  // namespace

TEST(Quantile, TypeSeven) {
    const std::vector<double> v = {1, 2, 3, 4};
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.25), 1.75);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.75), 3.25);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 0.0), 1);
    EXPECT_DOUBLE_EQ(quantile_sorted(v, 1.0), 4);
}

TEST(Stats, WinsorizeThenStandardize) {
    Dataset d;
    d.features = {FeatureId::v(1)};
    d.x = (Eigen::MatrixXd(5, 1) << 1, 2, 3, 4, 100).finished();
    d.y.assign(5, Label::Upwards);
    const auto stats = fit_stats(d);
    const auto& s = stats.columns[0];
    EXPECT_DOUBLE_EQ(s.q1, 2);
    EXPECT_DOUBLE_EQ(s.q3, 4);
    EXPECT_DOUBLE_EQ(s.lower, -1);
    EXPECT_DOUBLE_EQ(s.upper, 7);
    // Moments of the clamped sample {1, 2, 3, 4, 7}.
    EXPECT_DOUBLE_EQ(s.mean, 3.4);
    EXPECT_NEAR(s.stddev, std::sqrt(((1 - 3.4) * (1 - 3.4) + 1.96 + 0.16 + 0.36 + 12.96) / 4), 1e-12);

    const auto t = transform(d, stats);
    EXPECT_TRUE(t.standardized);
    EXPECT_NEAR(t.x(4, 0), (7 - 3.4) / s.stddev, 1e-12);
    EXPECT_THROW(transform(t, stats), ParameterError);
}

TEST(Stats, ConstantColumnMapsToZero) {
    Dataset d;
    d.features = {FeatureId::v(1)};
    d.x = Eigen::MatrixXd::Constant(4, 1, 2.5);
    d.y.assign(4, Label::Stationary);
    const auto stats = fit_stats(d);
    EXPECT_EQ(stats.columns[0].stddev, 0);
    EXPECT_EQ(transform(d, stats).x.cwiseAbs().maxCoeff(), 0);
}

TEST(Stats, TestRowsNeverTouchStats) {
    Dataset d = labeled_data(400, 5, 1);
    SamplingPlan plan{120, 80, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 3};
    const auto split = stratified_sample(d.y, plan);
    const auto before = fit_stats(d.select_rows(split.train));
    for (auto r : split.test) d.x.row(r) *= 1e6;
    const auto after = fit_stats(d.select_rows(split.train));
    EXPECT_TRUE(bit_identical(before, after));
}

TEST(Stats, ColumnsMatchedById) {
    const Dataset d = labeled_data(20, 3, 2);
    const auto stats = fit_stats(d);
    // Columns are matched by id, so a subset transforms like the full set.
    const std::vector<FeatureId> two = {FeatureId::v(3), FeatureId::v(1)};
    EXPECT_EQ(transform(d.select_columns(two), stats).x, transform(d, stats).select_columns(two).x);
    EXPECT_THROW(stats.at(FeatureId::v(9)), ParameterError);
    Dataset other = d;
    other.features[1] = FeatureId::v(9);
    EXPECT_THROW(transform(other, stats), ParameterError);
}

TEST(Stats, JsonRoundTripIsExact) {
    const auto stats = fit_stats(labeled_data(50, 4, 3));
    EXPECT_TRUE(bit_identical(stats, stats_from_json(stats_to_json(stats))));
}

TEST(Quotas, LargestRemainder) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double a = u(rng), b = u(rng) * (1 - a);
        const std::array<double, 3> ratio = {a, b, 1 - a - b};
        const long size = 1 + static_cast<long>(rng() % 5000);
        const auto got = class_quotas(size, ratio);
        const auto want = oracle::largest_remainder(size, ratio);
        for (int c = 0; c < 3; ++c) EXPECT_EQ(got[static_cast<std::size_t>(c)], want[static_cast<std::size_t>(c)]);
    }
    const auto even = class_quotas(10, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    EXPECT_EQ(even[0], 4);
    EXPECT_EQ(even[1], 3);
    EXPECT_EQ(even[2], 3);
}

TEST(Sampling, BalancedDisjointAndReproducible) {
    const Dataset d = labeled_data(3000, 1, 5);
    SamplingPlan plan{900, 600, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 42};
    const auto a = stratified_sample(d.y, plan);
    const auto b = stratified_sample(d.y, plan);
    EXPECT_EQ(a.train, b.train);
    EXPECT_EQ(a.test, b.test);
    ASSERT_EQ(a.train.size(), 900u);
    ASSERT_EQ(a.test.size(), 600u);
    EXPECT_TRUE(std::is_sorted(a.train.begin(), a.train.end()));
    std::array<int, 3> count{};
    for (auto r : a.train) ++count[static_cast<std::size_t>(class_index(d.y[static_cast<std::size_t>(r)]))];
    EXPECT_EQ(count[0], 300);
    EXPECT_EQ(count[1], 300);
    std::set<Eigen::Index> train(a.train.begin(), a.train.end());
    for (auto r : a.test) EXPECT_FALSE(train.count(r));
    plan.seed = 43;
    EXPECT_NE(stratified_sample(d.y, plan).train, a.train);
}

TEST(Sampling, ShortageNamesTheClass) {
    std::vector<Label> y(100, Label::Upwards);
    for (int i = 0; i < 10; ++i) y[static_cast<std::size_t>(i)] = Label::Downwards;
    for (int i = 10; i < 50; ++i) y[static_cast<std::size_t>(i)] = Label::Stationary;
    try {
        stratified_subset(y, 60, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 1);
        FAIL() << "expected a shortage";
    } catch (const ShortageError& e) {
        EXPECT_EQ(e.label, Label::Downwards);
    }
}

TEST(Sampling, CandidatesRestrictTheDraw) {
    const Dataset d = labeled_data(600, 1, 6);
    std::vector<Eigen::Index> even;
    for (Eigen::Index r = 0; r < 600; r += 2) even.push_back(r);
    const auto rows = stratified_subset(d.y, 60, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 9, even);
    for (auto r : rows) EXPECT_EQ(r % 2, 0);
}

TEST(Sampling, PlanValidation) {
    SamplingPlan plan;
    plan.ratio = {0.5, 0.5, 0.5};
    EXPECT_THROW(plan.validate(), ParameterError);
    plan = {};
    plan.train_size = 0;
    EXPECT_THROW(plan.validate(), ParameterError);
}

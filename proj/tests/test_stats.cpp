#include "lobbench/stats.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lobbench;

namespace {

TrainedModel enet_model(std::vector<FeatureId> features, Eigen::MatrixXd coef) {
    EnetClassifier c;
    c.coefficients = std::move(coef);
    TrainedModel m;
    m.body = c;
    m.features = std::move(features);
    return m;
}

}  // namespace

TEST(Wilcoxon, SmallestCase) {
    const std::vector<double> d = {1, 2, 3};
    const auto r = wilcoxon_signed_rank(d);
    EXPECT_EQ(r.n, 3);
    EXPECT_EQ(r.w, 6);
    EXPECT_DOUBLE_EQ(r.p, 0.125);
    EXPECT_TRUE(r.exact);
}

TEST(Wilcoxon, MatchesEnumeration) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 12);
        std::vector<double> d;
        for (int i = 0; i < n; ++i) {
            // Small integers force ties and zeros.
            const int v = static_cast<int>(rng() % 9) - 3;
            d.push_back(trial % 2 ? v : v * 0.37 + 0.01 * static_cast<double>(rng() % 7));
        }
        const auto r = wilcoxon_signed_rank(d);
        EXPECT_DOUBLE_EQ(r.p, oracle::wilcoxon_enumerated(d)) << "trial " << trial;
    }
}

TEST(Wilcoxon, ZerosDropped) {
    const std::vector<double> d = {0, 0, 1, 2, 3};
    EXPECT_EQ(wilcoxon_signed_rank(d).n, 3);
    EXPECT_DOUBLE_EQ(wilcoxon_signed_rank(d).p, 0.125);
    const std::vector<double> zeros = {0, 0, 0};
    const auto r = wilcoxon_signed_rank(zeros);
    EXPECT_EQ(r.p, 1.0);
    EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Wilcoxon, NormalApproximationBeyondExactRange) {
    std::vector<double> d;
    for (int i = 1; i <= 40; ++i) d.push_back(i % 4 == 0 ? -i : i);
    const auto r = wilcoxon_signed_rank(d);
    EXPECT_FALSE(r.exact);
    EXPECT_LT(r.p, 0.01);
    std::vector<double> neg(d);
    for (auto& v : neg) v = -v;
    EXPECT_GT(wilcoxon_signed_rank(neg).p, 0.99);
    // At the boundary both methods are available and must roughly agree.
    std::vector<double> e;
    for (int i = 1; i <= kWilcoxonExactMax; ++i) e.push_back(i % 3 == 0 ? -i : i);
    const auto exact = wilcoxon_signed_rank(e);
    e.push_back(0.5);
    e.push_back(-0.25);
    const auto approx = wilcoxon_signed_rank(e);
    EXPECT_TRUE(exact.exact);
    EXPECT_FALSE(approx.exact);
    EXPECT_NEAR(exact.p, approx.p, 0.02);
}

TEST(Wilcoxon, RejectsNonFinite) {
    const std::vector<double> d = {1, std::nan("")};
    EXPECT_THROW(wilcoxon_signed_rank(d), ParameterError);
}

TEST(Fdr, HandComputedStepUp) {
    const std::vector<double> p = {0.01, 0.04, 0.03, 0.005};
    const auto a = fdr_adjust(p);
    EXPECT_DOUBLE_EQ(a[0], 0.02);
    EXPECT_DOUBLE_EQ(a[1], 0.04);
    EXPECT_DOUBLE_EQ(a[2], 0.04);
    EXPECT_DOUBLE_EQ(a[3], 0.02);
    const std::vector<double> q = {0.5, 0.01, 0.2};
    const auto b = fdr_adjust(q);
    EXPECT_DOUBLE_EQ(b[0], 0.5);
    EXPECT_DOUBLE_EQ(b[1], 0.03);
    EXPECT_DOUBLE_EQ(b[2], 0.3);
    const std::vector<double> big = {0.9, 0.95};
    EXPECT_DOUBLE_EQ(fdr_adjust(big)[0], 0.95);
}

TEST(Fdr, MonotoneUnderPerturbation) {
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(1 + rng() % 20);
        for (auto& v : p) v = u(rng) * u(rng);
        const auto base = fdr_adjust(p);
        for (std::size_t i = 0; i < p.size(); ++i)
            for (std::size_t j = 0; j < p.size(); ++j)
                if (p[i] <= p[j]) EXPECT_LE(base[i], base[j]);
        auto up = p;
        const std::size_t k = rng() % p.size();
        up[k] = std::min(1.0, up[k] + u(rng) * 0.1);
        const auto raised = fdr_adjust(up);
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_GE(raised[i], base[i]);
            EXPECT_GE(base[i], p[i]);
        }
    }
}

TEST(Fdr, RejectsOutOfRange) {
    const std::vector<double> p = {0.1, 1.2};
    EXPECT_THROW(fdr_adjust(p), ParameterError);
    EXPECT_TRUE(fdr_adjust({}).empty());
}

TEST(Importance, FractionsOverFeatureUnion) {
    const std::vector<FeatureId> base = {FeatureId::v(1), FeatureId::v(2)};
    const std::vector<FeatureId> wider = {FeatureId::v(1), FeatureId::v(2), FeatureId::fpc(1)};
    std::vector<TrainedModel> models;
    for (int m = 0; m < 4; ++m) models.push_back(enet_model(base, (Eigen::MatrixXd(2, 3) << 1, 0, 0, 0, m, 0).finished()));
    models.push_back(enet_model(wider, (Eigen::MatrixXd(3, 3) << 1, 0, 0, 0, 0, 0, 0, 0, 2).finished()));
    std::vector<const TrainedModel*> ptrs;
    for (const auto& m : models) ptrs.push_back(&m);
    const auto rep = importance(ptrs);
    ASSERT_EQ(rep.features, wider);
    EXPECT_EQ(rep.models, 5);
    EXPECT_DOUBLE_EQ(rep.fraction(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(rep.fraction(1, 1), 0.6);
    EXPECT_DOUBLE_EQ(rep.fraction(2, 2), 0.2);
    EXPECT_TRUE(rep.high_impact(0, 0));
    EXPECT_FALSE(rep.high_impact(1, 1));

    const auto counts = high_impact_counts(std::vector<ImportanceReport>{rep, rep});
    EXPECT_EQ(counts.counts(0, 0), 2);
    EXPECT_EQ(counts.counts(2, 2), 0);
}

TEST(Importance, ThresholdIsInclusive) {
    const std::vector<FeatureId> f = {FeatureId::v(1)};
    std::vector<TrainedModel> models;
    for (int m = 0; m < 5; ++m) models.push_back(enet_model(f, (Eigen::MatrixXd(1, 3) << (m < 4), 0, 0).finished()));
    std::vector<const TrainedModel*> ptrs;
    for (const auto& m : models) ptrs.push_back(&m);
    EXPECT_TRUE(importance(ptrs).high_impact(0, 0));
}

TEST(Importance, RejectsSvmAndEmpty) {
    TrainedModel svm;
    svm.body = SvmClassifier{};
    const TrainedModel* ptrs[] = {&svm};
    EXPECT_THROW(importance(ptrs), ParameterError);
    EXPECT_THROW(importance(std::span<const TrainedModel* const>{}), ParameterError);
}

#include "lobbench/ensemble.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lobbench;

namespace {

Dataset pool_data(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Dataset d;
    d.features = {FeatureId::v(1), FeatureId::v(2)};
    d.x.resize(n, 2);
    for (int i = 0; i < n; ++i) {
        const int c = static_cast<int>(rng() % 3);
        d.x(i, 0) = z(rng) + (c - 1);
        d.x(i, 1) = z(rng);
        d.y.push_back(label_from_index(c));
        d.keys.push_back({1, i + 3});
    }
    d.standardized = true;
    return d;
}

EnsembleOptions options(int members, std::uint64_t seed, LearnerKind kind = LearnerKind::enet) {
    EnsembleOptions o;
    o.n_members = members;
    o.plan_template.train_size = 90;
    o.plan_template.seed = seed;
    o.learner.kind = kind;
    o.learner.enet = EnetParams{1e-3, 0.5};
    return o;
}

}  // namespace

TEST(Vote, Plurality) {
    EXPECT_EQ(plurality_vote(Eigen::Vector3i(30, 10, 60), Eigen::Vector3d::Zero()), Label::Upwards);
    EXPECT_EQ(plurality_vote(Eigen::Vector3i(1, 0, 1), Eigen::Vector3d::Zero()), Label::Downwards);
    EXPECT_EQ(plurality_vote(Eigen::Vector3i(1, 0, 1), Eigen::Vector3d(0, 5, 0.1)), Label::Upwards);
    EXPECT_EQ(plurality_vote(Eigen::Vector3i(0, 2, 2), Eigen::Vector3d(9, 1, 1)), Label::Stationary);
}

TEST(Vote, MatchesTallyOracle) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 2000; ++trial) {
        const int members = 1 + static_cast<int>(rng() % 8);
        std::vector<Label> labels;
        std::vector<std::array<double, 3>> scores;
        Eigen::Vector3i votes = Eigen::Vector3i::Zero();
        Eigen::Vector3d sums = Eigen::Vector3d::Zero();
        for (int m = 0; m < members; ++m) {
            labels.push_back(label_from_index(static_cast<int>(rng() % 3)));
            std::array<double, 3> s{};
            for (auto& v : s) v = static_cast<double>(rng() % 3);  // coarse values force score ties
            scores.push_back(s);
            ++votes(class_index(labels.back()));
            sums += Eigen::Vector3d(s[0], s[1], s[2]);
        }
        ASSERT_EQ(plurality_vote(votes, sums), oracle::tally(labels, scores)) << "trial " << trial;
    }
}

TEST(Ensemble, SingletonEqualsItsMember) {
    const auto pool = pool_data(400, 1);
    const auto test = pool_data(100, 2);
    const auto ens = ensemble_fit(pool, options(1, 7));
    ASSERT_EQ(ens.members.size(), 1u);
    const auto member = fit_learner(pool.select_rows(ens.members[0].rows), options(1, 7).learner);
    EXPECT_EQ(ensemble_predict(ens, test), predict(member, test));
    EXPECT_EQ(ens.members[0].plan.seed, derive_seed(7, 0));
}

TEST(Ensemble, MembersDrawBalancedDistinctSubsets) {
    const auto pool = pool_data(600, 3);
    const auto ens = ensemble_fit(pool, options(5, 8));
    ASSERT_EQ(ens.voting_members(), 5);
    for (const auto& m : ens.members) {
        ASSERT_EQ(m.rows.size(), 90u);
        std::array<int, 3> count{};
        for (auto r : m.rows) ++count[static_cast<std::size_t>(class_index(pool.y[static_cast<std::size_t>(r)]))];
        EXPECT_EQ(count[0], 30);
        EXPECT_EQ(count[2], 30);
    }
    EXPECT_NE(ens.members[0].rows, ens.members[1].rows);
}

TEST(Ensemble, DeterministicAcrossJobCounts) {
    const auto pool = pool_data(500, 4);
    const auto test = pool_data(200, 5);
    auto a = options(6, 9);
    auto b = a;
    b.jobs = 3;
    const auto ea = ensemble_fit(pool, a);
    const auto eb = ensemble_fit(pool, b);
    EXPECT_EQ(ensemble_to_json(ea), ensemble_to_json(eb));
    const auto pa = ensemble_predict_detailed(ea, test);
    const auto pb = ensemble_predict_detailed(eb, test);
    EXPECT_EQ(pa.labels, pb.labels);
    EXPECT_EQ(pa.votes, pb.votes);
    EXPECT_EQ(pa.votes.rowwise().sum(), Eigen::VectorXi::Constant(200, 6));
}

TEST(Ensemble, DuplicatedMembersDoNotChangeVotes) {
    const auto pool = pool_data(500, 6);
    const auto test = pool_data(150, 7);
    const auto ens = ensemble_fit(pool, options(5, 10));
    auto doubled = ens;
    doubled.members.insert(doubled.members.end(), ens.members.begin(), ens.members.end());
    EXPECT_EQ(ensemble_predict(doubled, test), ensemble_predict(ens, test));
    auto reversed = ens;
    std::reverse(reversed.members.begin(), reversed.members.end());
    EXPECT_EQ(ensemble_predict(reversed, test), ensemble_predict(ens, test));
}

TEST(Ensemble, FailedMembersAbstain) {
    const auto pool = pool_data(500, 8);
    const auto test = pool_data(150, 9);
    const auto ens = ensemble_fit(pool, options(5, 11));
    auto with_failure = ens;
    EnsembleMember failed;
    failed.error = "fit failed";
    with_failure.members.push_back(failed);
    EXPECT_EQ(with_failure.failed_members(), 1);
    EXPECT_EQ(ensemble_predict(with_failure, test), ensemble_predict(ens, test));
    EnsembleModel none;
    none.features = ens.features;
    none.members.push_back(failed);
    EXPECT_THROW(ensemble_predict(none, test), DataError);
}

TEST(Ensemble, FitErrorsAreRecordedPerMember) {
    auto pool = pool_data(300, 12);
    pool.x(5, 0) = std::nan("");
    const auto ens = ensemble_fit(pool, options(8, 13));
    EXPECT_EQ(ens.voting_members() + ens.failed_members(), 8);
    for (const auto& m : ens.members) {
        const bool has_nan = std::find(m.rows.begin(), m.rows.end(), 5) != m.rows.end();
        EXPECT_EQ(!m.model.has_value(), has_nan);
        if (has_nan) EXPECT_FALSE(m.error.empty());
    }
}

TEST(Ensemble, ShortagePropagates) {
    auto pool = pool_data(300, 14);
    auto opt = options(2, 15);
    opt.plan_template.train_size = 600;
    EXPECT_THROW(ensemble_fit(pool, opt), ShortageError);
}

TEST(Ensemble, JsonRoundTrip) {
    const auto pool = pool_data(400, 16);
    const auto test = pool_data(100, 17);
    const auto ens = ensemble_fit(pool, options(3, 18, LearnerKind::svm));
    const auto back = ensemble_from_json(ensemble_to_json(ens));
    EXPECT_EQ(ensemble_to_json(back), ensemble_to_json(ens));
    EXPECT_EQ(ensemble_predict(back, test), ensemble_predict(ens, test));
}

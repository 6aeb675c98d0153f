#include "lobbench/ensemble.hpp"

#include "lobbench/parallel.hpp"

#include <json.hpp>

namespace lobbench {

using nlohmann::json;

namespace {

constexpr const char* kEnsembleFormat = "lobbench.ensemble";
constexpr int kEnsembleVersion = 1;

}  // namespace

int EnsembleModel::voting_members() const {
    int n = 0;
    for (const auto& m : members) n += m.model ? 1 : 0;
    return n;
}

int EnsembleModel::failed_members() const { return static_cast<int>(members.size()) - voting_members(); }

EnsembleModel ensemble_fit(const Dataset& pool, const EnsembleOptions& options) {
    if (options.n_members < 1) throw ParameterError("ensemble: need at least one member");
    options.plan_template.validate();

    EnsembleModel model;
    model.features = pool.features;
    model.members.resize(static_cast<std::size_t>(options.n_members));
    // Draws first, sequentially, so a class shortage surfaces before any fit.
    for (int m = 0; m < options.n_members; ++m) {
        auto& member = model.members[static_cast<std::size_t>(m)];
        member.plan = options.plan_template;
        member.plan.seed = derive_seed(options.plan_template.seed, static_cast<std::uint64_t>(m));
        member.rows = stratified_subset(pool.y, member.plan.train_size, member.plan.ratio, member.plan.seed);
    }
    parallel_for(model.members.size(), options.jobs, [&](std::size_t m) {
        auto& member = model.members[m];
        try {
            member.model = fit_learner(pool.select_rows(member.rows), options.learner);
        } catch (const Error& e) {
            member.model.reset();
            member.error = e.what();
        }
    });
    return model;
}

Label plurality_vote(const Eigen::Ref<const Eigen::Vector3i>& votes, const Eigen::Ref<const Eigen::Vector3d>& score_sums) {
    int best = 0;
    for (int c = 1; c < kNumClasses; ++c)
        if (votes(c) > votes(best) || (votes(c) == votes(best) && score_sums(c) > score_sums(best))) best = c;
    return label_from_index(best);
}

EnsemblePrediction ensemble_predict_detailed(const EnsembleModel& model, const Dataset& rows) {
    if (model.voting_members() == 0) throw DataError("ensemble: no member can vote");
    const Eigen::Index n = rows.rows();
    EnsemblePrediction out;
    out.votes = Eigen::MatrixXi::Zero(n, kNumClasses);
    out.score_sums = Eigen::MatrixXd::Zero(n, kNumClasses);
    for (const auto& member : model.members) {
        if (!member.model) continue;
        const Prediction p = predict_with_scores(*member.model, rows);
        for (Eigen::Index i = 0; i < n; ++i) ++out.votes(i, class_index(p.labels[static_cast<std::size_t>(i)]));
        out.score_sums += p.scores;
    }
    out.labels.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        out.labels[static_cast<std::size_t>(i)] =
            plurality_vote(out.votes.row(i).transpose(), out.score_sums.row(i).transpose());
    return out;
}

std::vector<Label> ensemble_predict(const EnsembleModel& model, const Dataset& rows) {
    return ensemble_predict_detailed(model, rows).labels;
}

std::string ensemble_to_json(const EnsembleModel& model) {
    json j;
    j["format"] = kEnsembleFormat;
    j["version"] = kEnsembleVersion;
    json feats = json::array();
    for (const auto& f : model.features) feats.push_back(f.name());
    j["features"] = feats;
    json members = json::array();
    for (const auto& m : model.members) {
        json e = {{"train_size", m.plan.train_size},
                  {"ratio", m.plan.ratio},
                  {"seed", m.plan.seed},
                  {"rows", m.rows}};
        if (m.model) {
            // Members share the ensemble's stats; store them once.
            TrainedModel bare = *m.model;
            bare.stats.reset();
            e["model"] = json::parse(model_to_json(bare));
        } else {
            e["error"] = m.error;
        }
        members.push_back(std::move(e));
    }
    j["members"] = members;
    if (model.stats) j["column_stats"] = json::parse(stats_to_json(*model.stats));
    return j.dump(1);
}

EnsembleModel ensemble_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("ensemble: ") + e.what());
    }
    if (j.value("format", "") != kEnsembleFormat) throw DataError("ensemble: unexpected format tag");
    if (j.value("version", 0) != kEnsembleVersion) throw DataError("ensemble: unsupported version");
    try {
        EnsembleModel model;
        for (const auto& f : j.at("features")) model.features.push_back(FeatureId::parse(f.get<std::string>()));
        if (j.contains("column_stats")) model.stats = stats_from_json(j.at("column_stats").dump());
        for (const auto& e : j.at("members")) {
            EnsembleMember m;
            m.plan.train_size = e.at("train_size").get<Eigen::Index>();
            m.plan.ratio = e.at("ratio").get<std::array<double, kNumClasses>>();
            m.plan.seed = e.at("seed").get<std::uint64_t>();
            m.rows = e.at("rows").get<std::vector<Eigen::Index>>();
            if (e.contains("model")) {
                m.model = model_from_json(e.at("model").dump());
                m.model->stats = model.stats;
            } else {
                m.error = e.value("error", "");
            }
            model.members.push_back(std::move(m));
        }
        return model;
    } catch (const json::exception& e) {
        throw DataError(std::string("ensemble: ") + e.what());
    }
}

}  // namespace lobbench

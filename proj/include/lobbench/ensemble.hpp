#pragma once

#include "lobbench/model.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace lobbench {

struct EnsembleMember {
    SamplingPlan plan;                   // train_size, ratio and seed of the member's draw
    std::vector<Eigen::Index> rows;      // indices into the pool, ascending
    std::optional<TrainedModel> model;   // empty when the fit failed
    std::string error;
};

// Members fit on stratified subsets of one preprocessed pool and vote.
struct EnsembleModel {
    std::vector<EnsembleMember> members;
    std::vector<FeatureId> features;
    std::optional<ColumnStats> stats;  // shared preprocessing of the pool

    int voting_members() const;
    int failed_members() const;
};

struct EnsembleOptions {
    int n_members = 100;
    SamplingPlan plan_template;  // train_size and ratio per member; seed is the master seed
    LearnerSpec learner;
    int jobs = 1;
};

// Member m draws plan_template.train_size rows from `pool` with seed
// derive_seed(plan_template.seed, m). A class shortage throws ShortageError; a
// member whose fit throws is kept with its error and does not vote.
EnsembleModel ensemble_fit(const Dataset& pool, const EnsembleOptions& options);

// Label with most votes; a tie goes to the tied class with the largest summed
// score, then to the earliest class in Downwards < Stationary < Upwards.
Label plurality_vote(const Eigen::Ref<const Eigen::Vector3i>& votes, const Eigen::Ref<const Eigen::Vector3d>& score_sums);

struct EnsemblePrediction {
    std::vector<Label> labels;
    Eigen::MatrixXi votes;       // n x 3
    Eigen::MatrixXd score_sums;  // n x 3, summed member scores
};

// Throws DataError when no member can vote.
EnsemblePrediction ensemble_predict_detailed(const EnsembleModel& model, const Dataset& rows);
std::vector<Label> ensemble_predict(const EnsembleModel& model, const Dataset& rows);

std::string ensemble_to_json(const EnsembleModel& model);
EnsembleModel ensemble_from_json(const std::string& text);

}  // namespace lobbench

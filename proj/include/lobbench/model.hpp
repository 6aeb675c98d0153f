#pragma once

#include "lobbench/features.hpp"
#include "lobbench/preprocess.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace lobbench {

enum class LearnerKind { enet, svm };

std::string_view to_string(LearnerKind k);
LearnerKind parse_learner(std::string_view s);

struct EnetParams {
    double lambda = 0.0;
    double alpha_star = 0.5;  // 1 = lasso, 0 = ridge
    int max_iters = 100'000;  // coordinate sweeps per binary problem
    double tol = 1e-7;        // KKT tolerance

    void validate() const;
};

struct SvmParams {
    int degree = 2;
    double c = 0.25;
    double tol = 1e-3;  // maximal KKT violation at termination
    long max_iters = 10'000'000;

    void validate() const;
};

// One-vs-rest logistic elastic net: column c of `coefficients` scores class c.
struct EnetClassifier {
    Eigen::MatrixXd coefficients;  // p x 3
    Eigen::Vector3d intercepts = Eigen::Vector3d::Zero();
    EnetParams params;
    std::array<bool, kNumClasses> converged = {true, true, true};
    std::array<int, kNumClasses> sweeps = {0, 0, 0};
};

// Pairwise soft-margin machine: decision(x) = sum_i coef_i K(sv_i, x) + bias,
// positive values vote for `positive`.
struct BinarySvm {
    Label positive = Label::Downwards;
    Label negative = Label::Upwards;
    Eigen::MatrixXd support_vectors;  // m x p
    Eigen::VectorXd coefficients;     // alpha_i * y_i
    double bias = 0.0;
    bool converged = true;
    long iterations = 0;
};

struct SvmClassifier {
    std::vector<BinarySvm> machines;
    SvmParams params;
};

struct TrainedModel {
    std::variant<EnetClassifier, SvmClassifier> body;
    std::vector<FeatureId> features;
    std::optional<ColumnStats> stats;
    bool converged = true;

    LearnerKind kind() const { return body.index() == 0 ? LearnerKind::enet : LearnerKind::svm; }
    const EnetClassifier& enet() const { return std::get<EnetClassifier>(body); }
    const SvmClassifier& svm() const { return std::get<SvmClassifier>(body); }
};

// A learner with fixed hyperparameters.
struct LearnerSpec {
    LearnerKind kind = LearnerKind::enet;
    EnetParams enet;
    SvmParams svm;
};

// Dispatches to enet_fit or svm_fit.
TrainedModel fit_learner(const Dataset& train, const LearnerSpec& spec);

struct Prediction {
    std::vector<Label> labels;
    // n x 3 per-class scores: linear scores (ENet) or summed oriented pairwise
    // decision values (SVM).
    Eigen::MatrixXd scores;
};

// Rows must carry the model's feature order (ParameterError otherwise) and,
// when the model holds ColumnStats, be standardized.
Prediction predict_with_scores(const TrainedModel& model, const Dataset& rows);
std::vector<Label> predict(const TrainedModel& model, const Dataset& rows);

// Versioned JSON document: format tag, version, kind, feature order, column
// stats, parameters, and coefficients or support vectors.
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace lobbench

#pragma once

#include "lobbench/model.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace lobbench {

// Binary logistic elastic net
//
//   minimize  (1/n) sum_i [log(1 + exp(eta_i)) - y_i eta_i]
//             + lambda * (alpha * |beta|_1 + (1 - alpha) / 2 * |beta|_2^2),
//   eta_i = intercept + x_i . beta,  y_i in {0, 1}, intercept unpenalized.
//
// Solved by proximal Newton: each outer step builds the quadratic model of the
// loss and minimizes it (plus the penalty) by cyclic coordinate descent with
// soft-thresholding; a backtracking line search on the true objective makes the
// objective non-increasing from step to step. Convergence means every KKT
// condition holds within params.tol.
struct BinaryEnetFit {
    Eigen::VectorXd beta;
    double intercept = 0.0;
    bool converged = false;
    int sweeps = 0;  // coordinate-descent sweeps spent
    std::vector<double> objective_trace;
};

BinaryEnetFit fit_logistic_enet(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, const EnetParams& params,
                                const BinaryEnetFit* warm_start = nullptr);

double logistic_enet_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, const Eigen::VectorXd& beta,
                               double intercept, double lambda, double alpha_star);

// Largest violation of the optimality conditions: |d/d intercept|, and per
// coefficient the subgradient residual (nonzero) or excess of |gradient| over
// lambda * alpha (zero).
double logistic_enet_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, const Eigen::VectorXd& beta,
                                   double intercept, double lambda, double alpha_star);

// One-vs-rest fit over the three classes. Throws DataError on non-finite
// features or fewer than two classes. A non-converged problem sets
// converged = false rather than throwing.
TrainedModel enet_fit(const Dataset& train, const EnetParams& params);

struct EnetGrid {
    std::vector<double> lambdas;
    std::vector<double> alphas;

    // 100 lambdas log-evenly spaced over [1e-8, 5]; alpha in {0.2, 0.4, 0.6, 0.8}.
    static EnetGrid standard();
    static std::vector<double> log_spaced(double lo, double hi, int count);
    std::size_t size() const { return lambdas.size() * alphas.size(); }
};

struct EnetCvResult {
    TrainedModel model;
    double lambda = 0.0;
    double alpha_star = 0.0;
    Eigen::MatrixXd mean_f1;  // lambdas x alphas, validation macro-F1
};

// k-fold grid search on validation macro-F1 (ties to larger lambda, then larger
// alpha), then a refit on all of `train` with the winner. `base` supplies
// max_iters and tol.
EnetCvResult enet_cv_fit(const Dataset& train, const EnetGrid& grid, int folds, std::uint64_t seed,
                         const EnetParams& base = {}, int jobs = 1);

}  // namespace lobbench

#pragma once

#include "lobbench/model.hpp"

#include <Eigen/Core>

namespace lobbench {

// K(a, b) = (a . b + 1)^degree for every row pair: result is a.rows() x b.rows().
template <typename DerivedA, typename DerivedB>
Eigen::Matrix<typename DerivedA::Scalar, Eigen::Dynamic, Eigen::Dynamic> polynomial_kernel(
    const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, int degree) {
    using Scalar = typename DerivedA::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> k = a * b.transpose();
    k.array() += Scalar(1);
    if (degree == 2)
        k = k.array().square();
    else if (degree != 1)
        k = k.array().pow(Scalar(degree));
    return k;
}

struct SmoResult {
    Eigen::VectorXd alpha;
    double bias = 0.0;  // decision(x) = sum_i alpha_i y_i K(x_i, x) + bias
    bool converged = false;
    long iterations = 0;
};

// Soft-margin dual
//
//   minimize  1/2 a'Qa - sum(a),  Q_ij = y_i y_j K_ij,
//   subject to 0 <= a_i <= c,  y'a = 0,
//
// by sequential minimal optimization with second-order working-set selection.
// Stops when the maximal KKT violation drops below tol; hitting max_iterations
// leaves converged = false.
SmoResult solve_smo(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double c, double tol,
                    long max_iterations);

// Dual objective 1/2 a'Qa - sum(a) for the problem above.
double svm_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha);

// One-vs-one polynomial-kernel machines over every pair of classes present.
// Prediction is a pairwise vote; ties go to the largest summed decision value,
// then to class order. Throws DataError on non-finite features or fewer than
// two classes.
TrainedModel svm_fit(const Dataset& train, const SvmParams& params);

}  // namespace lobbench

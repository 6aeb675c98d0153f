#pragma once

#include "lobbench/core.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lobbench {

// A curve sampled on an equally spaced grid.
template <typename Scalar>
struct Trajectory {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector grid;
    Vector values;

    Eigen::Index size() const { return values.size(); }
};

// Discretized functional principal components.
//
// `components` holds one eigenfunction per column, sampled on `grid` and
// normalized so that quadrature_weight * <c_j, c_h> = delta_jh.
template <typename Scalar>
struct FpcaBasis {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    Vector grid;
    Vector mean_curve;
    Matrix components;
    Vector eigenvalues;      // retained, descending
    Scalar quadrature_weight = Scalar(0);
    Scalar variance_threshold = Scalar(0.999);
    Scalar total_variance = Scalar(0);

    Eigen::Index count() const { return components.cols(); }
    Eigen::Index grid_size() const { return grid.size(); }
};

namespace detail {

template <typename Scalar>
Scalar grid_spacing(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& grid) {
    if (grid.size() < 2) throw ParameterError("fpca: grid needs at least two points");
    const Scalar dt = grid(1) - grid(0);
    if (!(dt > Scalar(0))) throw ParameterError("fpca: grid must be increasing");
    for (Eigen::Index g = 1; g < grid.size(); ++g) {
        using std::abs;
        if (abs((grid(g) - grid(g - 1)) - dt) > Scalar(1e-9) * abs(dt) * Scalar(grid.size()))
            throw ParameterError("fpca: grid must be equally spaced");
    }
    return dt;
}

template <typename Scalar>
bool same_grid(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
    if (a.size() != b.size()) return false;
    using std::abs;
    const Scalar scale = a.size() > 1 ? abs(a(1) - a(0)) : Scalar(1);
    return ((a - b).cwiseAbs().maxCoeff() <= Scalar(1e-9) * scale);
}

}  // namespace detail

// Fits the basis on a set of trajectories sharing one grid.
//
// The covariance operator is discretized with quadrature weight dt: the
// eigenvectors v of dt * C (C the sample covariance, n-1 denominator) give
// eigenfunctions v / sqrt(dt) and the eigenvalues are the score variances.
// J is the smallest count whose cumulative share reaches variance_threshold;
// an all-identical input gives J = 0 and a note in `diagnostics`.
template <typename Scalar>
FpcaBasis<Scalar> fit_fpca(std::span<const Trajectory<Scalar>> trajectories, Scalar variance_threshold = Scalar(0.999),
                           std::vector<std::string>* diagnostics = nullptr) {
    using Matrix = typename FpcaBasis<Scalar>::Matrix;
    using Vector = typename FpcaBasis<Scalar>::Vector;

    if (trajectories.size() < 2) throw ParameterError("fpca: need at least two trajectories");
    if (!(variance_threshold > Scalar(0) && variance_threshold <= Scalar(1)))
        throw ParameterError("fpca: variance_threshold must lie in (0, 1]");
    const auto& grid = trajectories.front().grid;
    const Scalar dt = detail::grid_spacing(grid);
    const Eigen::Index G = grid.size();
    const Eigen::Index n = static_cast<Eigen::Index>(trajectories.size());

    Matrix x(n, G);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& tr = trajectories[static_cast<std::size_t>(i)];
        if (!detail::same_grid(tr.grid, grid) || tr.values.size() != G)
            throw ParameterError("fpca: trajectories must share one grid");
        if (!tr.values.allFinite()) throw DataError("fpca: trajectory has non-finite values");
        x.row(i) = tr.values.transpose();
    }

    FpcaBasis<Scalar> basis;
    basis.grid = grid;
    basis.quadrature_weight = dt;
    basis.variance_threshold = variance_threshold;
    basis.mean_curve = x.colwise().mean().transpose();

    const Matrix centered = x.rowwise() - basis.mean_curve.transpose();
    const Matrix op = (dt / Scalar(n - 1)) * (centered.transpose() * centered);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(op);
    if (solver.info() != Eigen::Success) throw DataError("fpca: eigen-decomposition failed");

    // Eigen returns ascending order.
    Vector values = solver.eigenvalues().reverse().cwiseMax(Scalar(0));
    Matrix vectors = solver.eigenvectors().rowwise().reverse();
    const Scalar total = values.sum();
    basis.total_variance = total;

    Eigen::Index keep = 0;
    if (total > Scalar(0)) {
        // Relative slack absorbs eigen-solver rounding when the cumulative share
        // lands exactly on the threshold.
        const Scalar target = variance_threshold * total * (Scalar(1) - Scalar(1e-9));
        Scalar cumulative = 0;
        while (keep < values.size() && cumulative < target) cumulative += values(keep++);
    } else if (diagnostics) {
        diagnostics->push_back("fpca: all trajectories identical; zero components retained");
    }

    basis.eigenvalues = values.head(keep);
    basis.components = vectors.leftCols(keep) / std::sqrt(dt);
    for (Eigen::Index j = 0; j < keep; ++j) {
        Eigen::Index arg;
        basis.components.col(j).cwiseAbs().maxCoeff(&arg);
        if (basis.components(arg, j) < Scalar(0)) basis.components.col(j) *= Scalar(-1);
    }
    return basis;
}

// s_j = dt * sum_g c_j(g) * (x(g) - mean(g)).
template <typename Scalar>
typename FpcaBasis<Scalar>::Vector project_scores(const Trajectory<Scalar>& trajectory, const FpcaBasis<Scalar>& basis) {
    if (!detail::same_grid(trajectory.grid, basis.grid) || trajectory.values.size() != basis.grid_size())
        throw ParameterError("fpca: trajectory grid does not match basis");
    return basis.quadrature_weight * (basis.components.transpose() * (trajectory.values - basis.mean_curve));
}

// Row-wise projection of curves stored one per row.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> project_scores(
    const Eigen::MatrixBase<Derived>& curves, const FpcaBasis<typename Derived::Scalar>& basis) {
    if (curves.cols() != basis.grid_size()) throw ParameterError("fpca: curve width does not match basis");
    return basis.quadrature_weight * ((curves.rowwise() - basis.mean_curve.transpose()) * basis.components);
}

// ---------------------------------------------------------------------------
// Day trajectories
// ---------------------------------------------------------------------------
struct TrajectoryOptions {
    std::int64_t horizon_ns = kSessionLengthNs;
    int grid_size = 390;

    void validate() const;
};

struct DayTrajectory {
    std::int32_t date = 0;
    Trajectory<double> trajectory;
};

// One trajectory per trading day in `events` (ordered by date): the day's
// mid-price sampled at 09:30 + g * horizon / G, g = 0..G-1, by last observation
// carried forward. Grid points before the first event take the first event's
// mid. The grid is expressed as a fraction of the horizon, so dt = 1 / G.
std::vector<DayTrajectory> build_trajectories(std::span<const QuoteEvent> events, const TrajectoryOptions& options,
                                              std::vector<std::string>* diagnostics = nullptr);

// Self-describing JSON: format tag, version, grid, mean curve, components,
// eigenvalues, quadrature weight, threshold, total variance.
std::string basis_to_json(const FpcaBasis<double>& basis);
FpcaBasis<double> basis_from_json(const std::string& text);
void save_basis(const std::filesystem::path& path, const FpcaBasis<double>& basis);
FpcaBasis<double> load_basis(const std::filesystem::path& path);

}  // namespace lobbench

#pragma once

// Problem generators shared by the unit tests and the acceptance binary.

#include "lobbench/enet.hpp"
#include "lobbench/fpca.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace fixture {

using lobbench::QuoteEvent;

// Events one second apart whose mid is exactly the given value.
inline std::vector<QuoteEvent> mids(std::int32_t date, const std::vector<double>& m) {
    std::vector<QuoteEvent> out;
    std::int64_t t = lobbench::kMarketOpenNs;
    for (double v : m) {
        QuoteEvent e = QuoteEvent::make(date, t += lobbench::kNsPerSecond, v, v, 1, 1);
        e.mid_price = v;
        out.push_back(e);
    }
    return out;
}

// Typical magnitude of each feature V1..V22 for a stream near `price`, used
// as the absolute floor when a value is zero in exact arithmetic.
inline std::array<double, 22> feature_scales(double price) {
    return {1e-3, 1e-3, 1e-3, price, price, price, 1e3, 1e3, price, 1, price,
            price, price, 1e3, 1e3, 1e-3, price, price, price, 1e3, 1e3, 1};
}

inline bool close(double got, long double want, double scale, long double rel = 1e-10L) {
    const long double diff = std::abs(static_cast<long double>(got) - want);
    return diff <= rel * std::max<long double>(std::abs(want), 1e-5L * scale);
}

inline Eigen::VectorXd unit_grid(int g) {
    Eigen::VectorXd grid(g);
    for (int i = 0; i < g; ++i) grid(i) = static_cast<double>(i) / g;
    return grid;
}

// Columns discretely orthonormal under weight 1/G: sqrt(G) times an
// orthonormal basis of R^G obtained from sines.
inline Eigen::MatrixXd orthonormal_functions(int g, int count) {
    Eigen::MatrixXd f(g, count);
    for (int j = 0; j < count; ++j)
        for (int i = 0; i < g; ++i) f(i, j) = std::sin(M_PI * (j + 1) * (i + 0.5) / g);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(g, count);
    return q * std::sqrt(static_cast<double>(g));
}

// n curves mean + sum_j s_ij f_j, where the score columns are centered,
// mutually orthogonal and have sample variances exactly `variances`.
inline std::vector<lobbench::Trajectory<double>> factor_curves(int n, int g, const std::vector<double>& variances,
                                                               std::uint64_t seed) {
    const int count = static_cast<int>(variances.size());
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    Eigen::MatrixXd raw(n, count);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < count; ++j) raw(i, j) = z(rng);
    raw.rowwise() -= raw.colwise().mean();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    Eigen::MatrixXd scores = qr.householderQ() * Eigen::MatrixXd::Identity(n, count);
    for (int j = 0; j < count; ++j) scores.col(j) *= std::sqrt(variances[static_cast<std::size_t>(j)] * (n - 1));
    const Eigen::MatrixXd f = orthonormal_functions(g, count);
    const Eigen::VectorXd grid = unit_grid(g);
    std::vector<lobbench::Trajectory<double>> out;
    for (int i = 0; i < n; ++i) {
        lobbench::Trajectory<double> t;
        t.grid = grid;
        t.values = Eigen::VectorXd::Constant(g, 100.0) + f * scores.row(i).transpose();
        out.push_back(std::move(t));
    }
    return out;
}

struct Problem {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

// Logistic-model draws with a 0/1 response.
inline Problem logistic_problem(int n, int p, std::uint64_t seed, double signal = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Problem pr{Eigen::MatrixXd(n, p), Eigen::VectorXd(n)};
    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta(j) = signal * z(rng);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) pr.x(i, j) = z(rng);
        const double eta = 0.3 + pr.x.row(i).dot(beta);
        pr.y(i) = u(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    return pr;
}

// Optimality conditions of the elastic-net logistic problem, recomputed from
// scratch.
inline double kkt_residual(const Problem& pr, const lobbench::BinaryEnetFit& fit, double lambda, double alpha) {
    const Eigen::Index n = pr.x.rows();
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double eta = fit.intercept + pr.x.row(i).dot(fit.beta);
        resid(i) = 1.0 / (1.0 + std::exp(-eta)) - pr.y(i);
    }
    double worst = std::abs(resid.mean());
    const Eigen::VectorXd g = pr.x.transpose() * resid / static_cast<double>(n);
    for (Eigen::Index j = 0; j < g.size(); ++j) {
        const double b = fit.beta(j);
        if (b != 0.0)
            worst = std::max(worst, std::abs(g(j) + lambda * (alpha * (b > 0 ? 1.0 : -1.0) + (1 - alpha) * b)));
        else
            worst = std::max(worst, std::abs(g(j)) - lambda * alpha);
    }
    return worst;
}

// Between 2 and 12 points in two dimensions with alternating +-1 labels.
inline Problem tiny_svm_problem(std::mt19937_64& rng) {
    std::normal_distribution<double> z;
    const int n = 2 + static_cast<int>(rng() % 11);
    Problem t{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
    for (int i = 0; i < n; ++i) {
        t.y(i) = i % 2 ? 1.0 : -1.0;
        t.x(i, 0) = z(rng) + 0.5 * t.y(i);
        t.x(i, 1) = z(rng);
    }
    return t;
}

}  // namespace fixture

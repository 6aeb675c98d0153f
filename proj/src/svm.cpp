#include "lobbench/svm.hpp"

#include <cmath>
#include <limits>

namespace lobbench {

namespace {

constexpr double kTau = 1e-12;

}  // namespace

void SvmParams::validate() const {
    if (degree < 1) throw ParameterError("svm: degree must be >= 1");
    if (!(c > 0.0) || !std::isfinite(c)) throw ParameterError("svm: C must be positive");
    if (!(tol > 0.0)) throw ParameterError("svm: tol must be positive");
    if (max_iters <= 0) throw ParameterError("svm: max_iters must be positive");
}

double svm_dual_objective(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, const Eigen::VectorXd& alpha) {
    const Eigen::VectorXd ya = y.cwiseProduct(alpha);
    return 0.5 * ya.dot(gram * ya) - alpha.sum();
}

SmoResult solve_smo(const Eigen::MatrixXd& gram, const Eigen::VectorXd& y, double c, double tol,
                    long max_iterations) {
    const Eigen::Index n = gram.rows();
    if (gram.cols() != n || y.size() != n) throw ParameterError("smo: gram and labels disagree in size");
    SmoResult res;
    res.alpha = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd& a = res.alpha;
    Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // Q a - 1
    const Eigen::VectorXd qd = gram.diagonal();
    auto q = [&](Eigen::Index i, Eigen::Index j) { return y(i) * y(j) * gram(i, j); };
    auto at_upper = [&](Eigen::Index i) { return a(i) >= c; };
    auto at_lower = [&](Eigen::Index i) { return a(i) <= 0.0; };
    constexpr double inf = std::numeric_limits<double>::infinity();

    while (true) {
        // Maximal violating index i, then j minimizing the second-order gain.
        double gmax = -inf;
        Eigen::Index i = -1;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (y(t) > 0) {
                if (!at_upper(t) && -grad(t) >= gmax) gmax = -grad(t), i = t;
            } else if (!at_lower(t) && grad(t) >= gmax) {
                gmax = grad(t), i = t;
            }
        }
        double gmax2 = -inf;
        Eigen::Index j = -1;
        double best_gain = inf;
        for (Eigen::Index t = 0; t < n; ++t) {
            if (y(t) > 0) {
                if (at_lower(t)) continue;
                const double diff = gmax + grad(t);
                gmax2 = std::max(gmax2, grad(t));
                if (i >= 0 && diff > 0) {
                    double quad = qd(i) + qd(t) - 2.0 * y(i) * q(i, t);
                    if (quad <= 0) quad = kTau;
                    const double gain = -diff * diff / quad;
                    if (gain <= best_gain) j = t, best_gain = gain;
                }
            } else {
                if (at_upper(t)) continue;
                const double diff = gmax - grad(t);
                gmax2 = std::max(gmax2, -grad(t));
                if (i >= 0 && diff > 0) {
                    double quad = qd(i) + qd(t) + 2.0 * y(i) * q(i, t);
                    if (quad <= 0) quad = kTau;
                    const double gain = -diff * diff / quad;
                    if (gain <= best_gain) j = t, best_gain = gain;
                }
            }
        }
        if (gmax + gmax2 < tol || j < 0) {
            res.converged = true;
            break;
        }
        if (res.iterations >= max_iterations) break;
        ++res.iterations;

        const double ai_old = a(i);
        const double aj_old = a(j);
        const double qij = q(i, j);
        if (y(i) != y(j)) {
            double quad = qd(i) + qd(j) + 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (-grad(i) - grad(j)) / quad;
            const double diff = a(i) - a(j);
            a(i) += delta;
            a(j) += delta;
            if (diff > 0) {
                if (a(j) < 0) a(j) = 0, a(i) = diff;
            } else if (a(i) < 0) {
                a(i) = 0, a(j) = -diff;
            }
            if (diff > 0) {
                if (a(i) > c) a(i) = c, a(j) = c - diff;
            } else if (a(j) > c) {
                a(j) = c, a(i) = c + diff;
            }
        } else {
            double quad = qd(i) + qd(j) - 2.0 * qij;
            if (quad <= 0) quad = kTau;
            const double delta = (grad(i) - grad(j)) / quad;
            const double sum = a(i) + a(j);
            a(i) -= delta;
            a(j) += delta;
            if (sum > c) {
                if (a(i) > c) a(i) = c, a(j) = sum - c;
            } else if (a(j) < 0) {
                a(j) = 0, a(i) = sum;
            }
            if (sum > c) {
                if (a(j) > c) a(j) = c, a(i) = sum - c;
            } else if (a(i) < 0) {
                a(i) = 0, a(j) = sum;
            }
        }
        const double di = a(i) - ai_old;
        const double dj = a(j) - aj_old;
        grad += (y(i) * di) * gram.col(i).cwiseProduct(y) + (y(j) * dj) * gram.col(j).cwiseProduct(y);
    }

    // Offset: average over free vectors, else midpoint of the feasible range.
    double ub = inf, lb = -inf, free_sum = 0.0;
    long free = 0;
    for (Eigen::Index t = 0; t < n; ++t) {
        const double yg = y(t) * grad(t);
        if (at_upper(t)) {
            if (y(t) < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (at_lower(t)) {
            if (y(t) > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++free;
            free_sum += yg;
        }
    }
    const double rho = free > 0 ? free_sum / static_cast<double>(free) : 0.5 * (ub + lb);
    res.bias = -rho;
    return res;
}

TrainedModel svm_fit(const Dataset& train, const SvmParams& params) {
    params.validate();
    train.validate();
    std::array<std::vector<Eigen::Index>, kNumClasses> by_class;
    for (Eigen::Index i = 0; i < train.rows(); ++i)
        by_class[class_index(train.y[static_cast<std::size_t>(i)])].push_back(i);
    int present = 0;
    for (const auto& v : by_class) present += v.empty() ? 0 : 1;
    if (present < 2) throw DataError("fit: training rows contain fewer than two classes");

    SvmClassifier clf;
    clf.params = params;
    bool all = true;
    for (int pc = 0; pc < kNumClasses; ++pc)
        for (int nc = pc + 1; nc < kNumClasses; ++nc) {
            if (by_class[pc].empty() || by_class[nc].empty()) continue;
            std::vector<Eigen::Index> rows = by_class[pc];
            rows.insert(rows.end(), by_class[nc].begin(), by_class[nc].end());
            const Eigen::MatrixXd x = train.x(rows, Eigen::all);
            Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
            y.head(static_cast<Eigen::Index>(by_class[pc].size())).setOnes();
            y.tail(static_cast<Eigen::Index>(by_class[nc].size())).setConstant(-1.0);

            const SmoResult smo = solve_smo(polynomial_kernel(x, x, params.degree), y, params.c, params.tol,
                                            params.max_iters);
            std::vector<Eigen::Index> sv;
            for (Eigen::Index t = 0; t < y.size(); ++t)
                if (smo.alpha(t) > 0.0) sv.push_back(t);
            BinarySvm m;
            m.positive = label_from_index(pc);
            m.negative = label_from_index(nc);
            m.support_vectors = x(sv, Eigen::all);
            m.coefficients.resize(static_cast<Eigen::Index>(sv.size()));
            for (std::size_t s = 0; s < sv.size(); ++s)
                m.coefficients(static_cast<Eigen::Index>(s)) = smo.alpha(sv[s]) * y(sv[s]);
            m.bias = smo.bias;
            m.converged = smo.converged;
            m.iterations = smo.iterations;
            all = all && smo.converged;
            clf.machines.push_back(std::move(m));
        }

    TrainedModel model;
    model.body = std::move(clf);
    model.features = train.features;
    model.converged = all;
    return model;
}

}  // namespace lobbench

#include "lobbench/enet.hpp"

#include "lobbench/metrics.hpp"
#include "lobbench/parallel.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace lobbench {

namespace {

// Intercept of a class that never occurs in training: its score never wins.
constexpr double kAbsentIntercept = -1e30;
constexpr double kWeightFloor = 1e-5;
constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;


double sigmoid(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

// The objective is accumulated in extended precision: close to the optimum a
// Newton step lowers it by less than one double ulp, and the line search
// must still see the decrease.
long double softplus_ld(double eta) {
    const long double e = eta;
    return std::max(e, 0.0L) + std::log1p(std::exp(-std::abs(e)));
}

long double mean_loss(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        s += softplus_ld(eta(i)) - static_cast<long double>(y(i)) * eta(i);
    return s / static_cast<long double>(eta.size());
}

long double penalty(const Eigen::VectorXd& beta, double lambda, double alpha) {
    long double l1 = 0.0L, l2 = 0.0L;
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        l1 += std::abs(static_cast<long double>(beta(j)));
        l2 += static_cast<long double>(beta(j)) * beta(j);
    }
    return static_cast<long double>(lambda) * (alpha * l1 + 0.5L * (1.0 - alpha) * l2);
}

// Gradient of the mean loss with respect to (intercept, beta).
Eigen::VectorXd loss_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
    const auto n = static_cast<double>(x.rows());
    Eigen::VectorXd resid(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) resid(i) = sigmoid(eta(i)) - y(i);
    Eigen::VectorXd g(x.cols() + 1);
    g(0) = resid.sum() / n;
    g.tail(x.cols()).noalias() = x.transpose() * resid / n;
    return g;
}

// g = loss gradient over (intercept, beta); the ridge part is added here.
double kkt_violation(const Eigen::VectorXd& g, const Eigen::VectorXd& beta, double lambda, double alpha) {
    double worst = std::abs(g(0));
    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        const double gj = g(j + 1) + l2 * beta(j);
        const double v = beta(j) != 0.0 ? std::abs(gj + (beta(j) > 0 ? l1 : -l1)) : std::max(0.0, std::abs(gj) - l1);
        worst = std::max(worst, v);
    }
    return worst;
}

// Minimizes the quadratic model over the current support with coefficient
// signs held fixed. A coefficient that would cross zero is pinned there and
// the reduced problem solved again. cand holds (intercept, beta) and r the
// model gradient. Returns false when a reduced system is not positive definite.
bool subspace_newton(const Eigen::MatrixXd& h, double l1, double l2, Eigen::VectorXd& cand, Eigen::VectorXd& r) {
    std::vector<Eigen::Index> act{0};
    for (Eigen::Index j = 1; j < cand.size(); ++j)
        if (cand(j) != 0.0) act.push_back(j);
    while (true) {
        const auto m = static_cast<Eigen::Index>(act.size());
        Eigen::MatrixXd ha = h(act, act);
        Eigen::VectorXd grad(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index j = act[static_cast<std::size_t>(k)];
            grad(k) = r(j);
            if (j > 0) {
                ha(k, k) += l2;
                grad(k) += l2 * cand(j) + (cand(j) > 0.0 ? l1 : -l1);
            }
        }
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(ha);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
        const Eigen::VectorXd step = -ldlt.solve(grad);
        if (!step.allFinite()) return false;

        double t = 1.0;
        Eigen::Index hit = -1;
        for (Eigen::Index k = 1; k < m; ++k) {
            const double c = cand(act[static_cast<std::size_t>(k)]);
            if (c * (c + step(k)) <= 0.0) {
                const double tk = -c / step(k);
                if (tk < t) t = tk, hit = k;
            }
        }
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::Index j = act[static_cast<std::size_t>(k)];
            const double d = k == hit ? -cand(j) : t * step(k);
            cand(j) = k == hit ? 0.0 : cand(j) + d;
            r += h.col(j) * d;
        }
        if (hit < 0) return true;
        act.erase(act.begin() + hit);
    }
}

}  // namespace

void EnetParams::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("enet: lambda must be finite and >= 0");
    if (!(alpha_star >= 0.0 && alpha_star <= 1.0)) throw ParameterError("enet: alpha_star must lie in [0, 1]");
    if (max_iters <= 0) throw ParameterError("enet: max_iters must be positive");
    if (!(tol > 0.0)) throw ParameterError("enet: tol must be positive");
}

double logistic_enet_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, const Eigen::VectorXd& beta,
                               double intercept, double lambda, double alpha_star) {
    const Eigen::VectorXd eta = (x * beta).array() + intercept;
    return static_cast<double>(mean_loss(eta, y01) + penalty(beta, lambda, alpha_star));
}

double logistic_enet_kkt_violation(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, const Eigen::VectorXd& beta,
                                   double intercept, double lambda, double alpha_star) {
    const Eigen::VectorXd eta = (x * beta).array() + intercept;
    return kkt_violation(loss_gradient(x, y01, eta), beta, lambda, alpha_star);
}

BinaryEnetFit fit_logistic_enet(const Eigen::MatrixXd& x, const Eigen::VectorXd& y01, const EnetParams& params,
                                const BinaryEnetFit* warm_start) {
    params.validate();
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    if (n == 0 || y01.size() != n) throw ParameterError("enet: design and response sizes differ");
    const double lambda = params.lambda;
    const double alpha = params.alpha_star;
    const double l1 = lambda * alpha;
    const double l2 = lambda * (1.0 - alpha);

    BinaryEnetFit fit;
    if (warm_start && warm_start->beta.size() == p) {
        fit.beta = warm_start->beta;
        fit.intercept = warm_start->intercept;
    } else {
        fit.beta = Eigen::VectorXd::Zero(p);
        const double ybar = std::clamp(y01.mean(), 1e-6, 1.0 - 1e-6);
        fit.intercept = std::log(ybar / (1.0 - ybar));
    }

    Eigen::VectorXd eta = (x * fit.beta).array() + fit.intercept;
    long double objective = mean_loss(eta, y01) + penalty(fit.beta, lambda, alpha);
    fit.objective_trace.push_back(static_cast<double>(objective));

    Eigen::VectorXd w(n);
    Eigen::MatrixXd xw(n, p);
    Eigen::MatrixXd h(p + 1, p + 1);
    Eigen::VectorXd cand(p + 1);
    std::vector<int> signs;

    while (true) {
        const Eigen::VectorXd g = loss_gradient(x, y01, eta);
        if (kkt_violation(g, fit.beta, lambda, alpha) <= params.tol) {
            fit.converged = true;
            break;
        }
        if (fit.sweeps >= params.max_iters) break;

        // Quadratic model of the loss around the current point, intercept as
        // coordinate 0.
        for (Eigen::Index i = 0; i < n; ++i) {
            const double pi = sigmoid(eta(i));
            w(i) = std::max(pi * (1.0 - pi), kWeightFloor);
        }
        xw = x.array().colwise() * w.array();
        h(0, 0) = w.sum() / static_cast<double>(n);
        h.block(1, 0, p, 1) = xw.colwise().sum().transpose() / static_cast<double>(n);
        h.block(0, 1, 1, p) = h.block(1, 0, p, 1).transpose();
        h.block(1, 1, p, p).noalias() = x.transpose() * xw / static_cast<double>(n);

        // Coordinate descent on g.d + d'Hd/2 + penalty(beta + d) over
        // cand = (intercept, beta); r tracks the model gradient at cand. Once
        // the signed support survives a full sweep, a subspace Newton step
        // finishes the job that plain sweeps crawl through on collinear columns.
        cand(0) = fit.intercept;
        cand.tail(p) = fit.beta;
        Eigen::VectorXd r = g;
        signs.assign(static_cast<std::size_t>(p), 0);
        while (fit.sweeps < params.max_iters) {
            ++fit.sweeps;
            if (h(0, 0) > 0.0) {
                const double d = -r(0) / h(0, 0);
                cand(0) += d;
                r += h.col(0) * d;
            }
            bool same_support = true;
            for (Eigen::Index j = 1; j <= p; ++j) {
                const double hjj = h(j, j);
                const double a = hjj + l2;
                const double old = cand(j);
                const double updated = a > 0.0 ? soft_threshold(hjj * old - r(j), l1) / a : 0.0;
                const double d = updated - old;
                if (d != 0.0) {
                    cand(j) = updated;
                    r += h.col(j) * d;
                }
                const int sg = (updated > 0.0) - (updated < 0.0);
                if (sg != signs[static_cast<std::size_t>(j - 1)]) same_support = false;
                signs[static_cast<std::size_t>(j - 1)] = sg;
            }
            if (kkt_violation(r, cand.tail(p), lambda, alpha) <= 0.1 * params.tol) break;
            if (same_support && subspace_newton(h, l1, l2, cand, r) &&
                kkt_violation(r, cand.tail(p), lambda, alpha) <= 0.1 * params.tol)
                break;
        }
        const double cand_b0 = cand(0);
        const Eigen::VectorXd cand_beta = cand.tail(p);

        // Backtracking on the true objective along the proximal Newton step.
        const Eigen::VectorXd d_beta = cand_beta - fit.beta;
        const double d_b0 = cand_b0 - fit.intercept;
        const long double decrement = g(0) * d_b0 + g.tail(p).dot(d_beta) + penalty(cand_beta, lambda, alpha) -
                                 penalty(fit.beta, lambda, alpha);
        const Eigen::VectorXd x_dbeta = x * d_beta;
        double t = 1.0;
        bool accepted = false;
        Eigen::VectorXd trial_beta;
        Eigen::VectorXd trial_eta;
        long double trial_obj = objective;
        for (int k = 0; k < kMaxHalvings; ++k, t *= 0.5) {
            trial_beta = fit.beta + t * d_beta;
            trial_eta = eta + t * (x_dbeta.array() + d_b0).matrix();
            trial_obj = mean_loss(trial_eta, y01) + penalty(trial_beta, lambda, alpha);
            if (trial_obj <= objective + kArmijo * t * std::min(decrement, 0.0L) && trial_obj <= objective) {
                accepted = true;
                break;
            }
        }
        if (!accepted) break;  // no descent left at working precision
        if (trial_obj > objective) throw std::logic_error("enet: objective increased");
        fit.beta = trial_beta;
        fit.intercept += t * d_b0;
        eta = trial_eta;
        const bool stalled = trial_obj == objective && t < 1.0;
        objective = trial_obj;
        fit.objective_trace.push_back(static_cast<double>(objective));
        if (stalled) break;
    }
    if (!fit.converged)
        fit.converged = logistic_enet_kkt_violation(x, y01, fit.beta, fit.intercept, lambda, alpha) <= params.tol;
    return fit;
}

namespace {

void check_training_rows(const Dataset& train) {
    train.validate();
    std::array<Eigen::Index, kNumClasses> count{};
    for (auto l : train.y) ++count[class_index(l)];
    const auto present = std::count_if(count.begin(), count.end(), [](auto c) { return c > 0; });
    if (present < 2) throw DataError("fit: training rows contain fewer than two classes");
}

struct OvrState {
    std::array<BinaryEnetFit, kNumClasses> fits;
};

// Fits the three one-vs-rest problems, optionally warm-started.
void fit_ovr(const Eigen::MatrixXd& x, const std::vector<Label>& y, const EnetParams& params, OvrState& state,
             bool warm) {
    for (int c = 0; c < kNumClasses; ++c) {
        Eigen::VectorXd target(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i)
            target(i) = class_index(y[static_cast<std::size_t>(i)]) == c ? 1.0 : 0.0;
        if (target.sum() == 0.0) {
            state.fits[c] = BinaryEnetFit{};
            state.fits[c].beta = Eigen::VectorXd::Zero(x.cols());
            state.fits[c].intercept = kAbsentIntercept;
            state.fits[c].converged = true;
            continue;
        }
        const BinaryEnetFit* start = warm && state.fits[c].beta.size() == x.cols() &&
                                             state.fits[c].intercept != kAbsentIntercept
                                         ? &state.fits[c]
                                         : nullptr;
        BinaryEnetFit next = fit_logistic_enet(x, target, params, start);
        next.objective_trace.clear();
        next.objective_trace.shrink_to_fit();
        state.fits[c] = std::move(next);
    }
}

std::vector<Label> argmax_labels(const Eigen::MatrixXd& scores) {
    std::vector<Label> out(static_cast<std::size_t>(scores.rows()));
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < kNumClasses; ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        out[static_cast<std::size_t>(i)] = label_from_index(best);
    }
    return out;
}

Eigen::MatrixXd ovr_scores(const Eigen::MatrixXd& x, const OvrState& state) {
    Eigen::MatrixXd s(x.rows(), kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) s.col(c) = (x * state.fits[c].beta).array() + state.fits[c].intercept;
    return s;
}

TrainedModel make_model(const Dataset& train, const EnetParams& params, const OvrState& state) {
    EnetClassifier clf;
    clf.params = params;
    clf.coefficients.resize(train.cols(), kNumClasses);
    bool all = true;
    for (int c = 0; c < kNumClasses; ++c) {
        clf.coefficients.col(c) = state.fits[c].beta;
        clf.intercepts(c) = state.fits[c].intercept;
        clf.converged[c] = state.fits[c].converged;
        clf.sweeps[c] = state.fits[c].sweeps;
        all = all && state.fits[c].converged;
    }
    TrainedModel m;
    m.body = std::move(clf);
    m.features = train.features;
    m.converged = all;
    return m;
}

}  // namespace

TrainedModel enet_fit(const Dataset& train, const EnetParams& params) {
    params.validate();
    check_training_rows(train);
    OvrState state;
    fit_ovr(train.x, train.y, params, state, false);
    return make_model(train, params, state);
}

std::vector<double> EnetGrid::log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi >= lo) || count < 1) throw ParameterError("enet grid: need 0 < lo <= hi and count >= 1");
    std::vector<double> out(static_cast<std::size_t>(count));
    if (count == 1) {
        out[0] = lo;
        return out;
    }
    const double a = std::log(lo);
    const double b = std::log(hi);
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

EnetGrid EnetGrid::standard() { return EnetGrid{log_spaced(1e-8, 5.0, 100), {0.2, 0.4, 0.6, 0.8}}; }

EnetCvResult enet_cv_fit(const Dataset& train, const EnetGrid& grid, int folds, std::uint64_t seed,
                         const EnetParams& base, int jobs) {
    base.validate();
    check_training_rows(train);
    if (grid.lambdas.empty() || grid.alphas.empty()) throw ParameterError("enet cv: empty grid");
    for (double l : grid.lambdas) EnetParams{l, 0.5, base.max_iters, base.tol}.validate();
    for (double a : grid.alphas) EnetParams{0.0, a, base.max_iters, base.tol}.validate();
    if (folds < 2 || folds > train.rows()) throw ParameterError("enet cv: folds must lie in [2, rows]");

    const auto n = static_cast<std::size_t>(train.rows());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    std::vector<int> fold_of(n);
    for (std::size_t k = 0; k < n; ++k) fold_of[order[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));

    // Lambdas visited from largest to smallest so each fit warm-starts from a
    // sparser neighbour.
    std::vector<std::size_t> lambda_order(grid.lambdas.size());
    std::iota(lambda_order.begin(), lambda_order.end(), 0);
    std::stable_sort(lambda_order.begin(), lambda_order.end(),
                     [&](std::size_t a, std::size_t b) { return grid.lambdas[a] > grid.lambdas[b]; });

    const std::size_t na = grid.alphas.size();
    const std::size_t nl = grid.lambdas.size();
    std::vector<Eigen::MatrixXd> fold_f1(static_cast<std::size_t>(folds), Eigen::MatrixXd::Zero(nl, na));
    parallel_for(static_cast<std::size_t>(folds) * na, jobs, [&](std::size_t task) {
        const int f = static_cast<int>(task / na);
        const std::size_t ai = task % na;
        std::vector<Eigen::Index> tr_idx, va_idx;
        for (std::size_t i = 0; i < n; ++i)
            (fold_of[i] == f ? va_idx : tr_idx).push_back(static_cast<Eigen::Index>(i));
        const Eigen::MatrixXd xtr = train.x(tr_idx, Eigen::all);
        const Eigen::MatrixXd xva = train.x(va_idx, Eigen::all);
        std::vector<Label> ytr, yva;
        for (auto i : tr_idx) ytr.push_back(train.y[static_cast<std::size_t>(i)]);
        for (auto i : va_idx) yva.push_back(train.y[static_cast<std::size_t>(i)]);

        OvrState state;
        bool warm = false;
        for (std::size_t li : lambda_order) {
            const EnetParams p{grid.lambdas[li], grid.alphas[ai], base.max_iters, base.tol};
            fit_ovr(xtr, ytr, p, state, warm);
            warm = true;
            fold_f1[static_cast<std::size_t>(f)](static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(ai)) =
                score(argmax_labels(ovr_scores(xva, state)), yva).macro.f1;
        }
    });

    EnetCvResult result;
    result.mean_f1 = Eigen::MatrixXd::Zero(nl, na);
    for (const auto& m : fold_f1) result.mean_f1 += m;
    result.mean_f1 /= static_cast<double>(folds);

    std::size_t best_l = 0, best_a = 0;
    bool have = false;
    for (std::size_t li = 0; li < nl; ++li)
        for (std::size_t ai = 0; ai < na; ++ai) {
            const double v = result.mean_f1(static_cast<Eigen::Index>(li), static_cast<Eigen::Index>(ai));
            const double bv = result.mean_f1(static_cast<Eigen::Index>(best_l), static_cast<Eigen::Index>(best_a));
            const bool better =
                !have || v > bv ||
                (v == bv && (grid.lambdas[li] > grid.lambdas[best_l] ||
                             (grid.lambdas[li] == grid.lambdas[best_l] && grid.alphas[ai] > grid.alphas[best_a])));
            if (better) {
                best_l = li;
                best_a = ai;
                have = true;
            }
        }
    result.lambda = grid.lambdas[best_l];
    result.alpha_star = grid.alphas[best_a];
    result.model = enet_fit(train, EnetParams{result.lambda, result.alpha_star, base.max_iters, base.tol});
    return result;
}

}  // namespace lobbench

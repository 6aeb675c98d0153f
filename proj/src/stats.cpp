#include "lobbench/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace lobbench {

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
    WilcoxonResult res;
    std::vector<double> d;
    for (double v : diffs) {
        if (!std::isfinite(v)) throw ParameterError("wilcoxon: non-finite difference");
        if (v != 0.0) d.push_back(v);
    }
    res.n = static_cast<int>(d.size());
    if (d.empty()) {
        res.p = 1.0;
        res.diagnostic = "all differences are zero";
        return res;
    }

    const std::size_t n = d.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return std::abs(d[a]) < std::abs(d[b]); });

    // Ranks doubled so average ranks stay integral.
    std::vector<std::int64_t> rank2(n);
    double tie_term = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(d[order[j + 1]]) == std::abs(d[order[i]])) ++j;
        const auto r2 = static_cast<std::int64_t>(i + 1 + j + 1);  // 2 * mean of ranks i+1..j+1
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = r2;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    std::int64_t w2 = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (d[i] > 0) w2 += rank2[i];
    res.w = static_cast<double>(w2) / 2.0;

    const double nn = static_cast<double>(n);
    if (res.n <= kWilcoxonExactMax) {
        // count[s] = number of sign assignments whose doubled positive-rank sum is s.
        const std::int64_t total2 = std::accumulate(rank2.begin(), rank2.end(), std::int64_t{0});
        std::vector<std::uint64_t> count(static_cast<std::size_t>(total2 + 1), 0);
        count[0] = 1;
        std::int64_t reach = 0;
        for (auto r : rank2) {
            for (std::int64_t s = reach; s >= 0; --s)
                if (count[static_cast<std::size_t>(s)]) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
            reach += r;
        }
        std::uint64_t at_least = 0;
        for (std::int64_t s = w2; s <= total2; ++s) at_least += count[static_cast<std::size_t>(s)];
        res.p = static_cast<double>(at_least) / std::ldexp(1.0, res.n);
        res.exact = true;
    } else {
        const double mean = nn * (nn + 1.0) / 4.0;
        const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
        const double z = (res.w - mean - 0.5) / std::sqrt(var);
        res.p = std::min(1.0, 0.5 * std::erfc(z / std::sqrt(2.0)));
        res.exact = false;
    }
    return res;
}

std::vector<double> fdr_adjust(std::span<const double> raw_p) {
    for (double p : raw_p)
        if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("fdr: p-values must lie in [0, 1]");
    const std::size_t m = raw_p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return raw_p[a] < raw_p[b]; });
    std::vector<double> adj(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double v = std::min(1.0, raw_p[order[k]] * (static_cast<double>(m) / static_cast<double>(k + 1)));
        running = std::min(running, v);
        adj[order[k]] = running;
    }
    return adj;
}

ImportanceReport importance(std::span<const TrainedModel* const> models, double threshold) {
    if (models.empty()) throw ParameterError("importance: no models");
    ImportanceReport rep;
    rep.threshold = threshold;
    for (const TrainedModel* m : models) {
        if (m->kind() != LearnerKind::enet) throw ParameterError("importance: only elastic-net models carry selection");
        rep.features.insert(rep.features.end(), m->features.begin(), m->features.end());
    }
    std::sort(rep.features.begin(), rep.features.end());
    rep.features.erase(std::unique(rep.features.begin(), rep.features.end()), rep.features.end());

    Eigen::MatrixXi selected = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(rep.features.size()), kNumClasses);
    for (const TrainedModel* m : models) {
        const auto& coef = m->enet().coefficients;
        for (std::size_t j = 0; j < m->features.size(); ++j) {
            const auto row = std::lower_bound(rep.features.begin(), rep.features.end(), m->features[j]) -
                             rep.features.begin();
            for (int c = 0; c < kNumClasses; ++c)
                if (coef(static_cast<Eigen::Index>(j), c) != 0.0) ++selected(row, c);
        }
    }
    rep.models = static_cast<int>(models.size());
    rep.fraction = selected.cast<double>() / static_cast<double>(rep.models);
    return rep;
}

HighImpactCounts high_impact_counts(std::span<const ImportanceReport> reports) {
    HighImpactCounts out;
    for (const auto& r : reports) out.features.insert(out.features.end(), r.features.begin(), r.features.end());
    std::sort(out.features.begin(), out.features.end());
    out.features.erase(std::unique(out.features.begin(), out.features.end()), out.features.end());
    out.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(out.features.size()), kNumClasses);
    for (const auto& r : reports)
        for (std::size_t f = 0; f < r.features.size(); ++f) {
            const auto row = std::lower_bound(out.features.begin(), out.features.end(), r.features[f]) -
                             out.features.begin();
            for (int c = 0; c < kNumClasses; ++c)
                out.counts(row, c) += r.high_impact(static_cast<Eigen::Index>(f), c) ? 1 : 0;
        }
    return out;
}

}  // namespace lobbench

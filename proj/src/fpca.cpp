#include "lobbench/fpca.hpp"

#include "lobbench/windowing.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace lobbench {

namespace {

constexpr const char* kBasisFormat = "lobbench.fpca_basis";
constexpr int kBasisVersion = 1;

std::vector<double> to_vec(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vec(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void TrajectoryOptions::validate() const {
    if (horizon_ns <= 0) throw ParameterError("fpca: horizon must be positive");
    if (grid_size < 2) throw ParameterError("fpca: grid_size must be >= 2");
}

std::vector<DayTrajectory> build_trajectories(std::span<const QuoteEvent> events, const TrajectoryOptions& options,
                                              std::vector<std::string>* diagnostics) {
    options.validate();
    const int G = options.grid_size;
    Eigen::VectorXd grid(G);
    for (int g = 0; g < G; ++g) grid(g) = static_cast<double>(g) / G;

    std::vector<DayTrajectory> out;
    for (auto day : split_days(events)) {
        const std::int64_t end = kMarketOpenNs + options.horizon_ns;
        std::size_t usable = 0;
        while (usable < day.size() && day[usable].timestamp_ns < end) ++usable;
        if (usable == 0 || day.front().timestamp_ns >= end) {
            if (diagnostics)
                diagnostics->push_back("fpca: no events within the horizon on date " + std::to_string(day.front().date) +
                                       "; trajectory skipped");
            continue;
        }
        DayTrajectory tr;
        tr.date = day.front().date;
        tr.trajectory.grid = grid;
        tr.trajectory.values.resize(G);
        std::size_t next = 0;
        double current = day.front().mid_price;
        for (int g = 0; g < G; ++g) {
            // Integer grid time: open + g * horizon / G.
            const std::int64_t t = kMarketOpenNs + options.horizon_ns / G * g + options.horizon_ns % G * g / G;
            while (next < usable && day[next].timestamp_ns <= t) current = day[next++].mid_price;
            tr.trajectory.values(g) = current;
        }
        out.push_back(std::move(tr));
    }
    return out;
}

std::string basis_to_json(const FpcaBasis<double>& basis) {
    nlohmann::json j;
    j["format"] = kBasisFormat;
    j["version"] = kBasisVersion;
    j["grid"] = to_vec(basis.grid);
    j["mean_curve"] = to_vec(basis.mean_curve);
    j["eigenvalues"] = to_vec(basis.eigenvalues);
    j["quadrature_weight"] = basis.quadrature_weight;
    j["variance_threshold"] = basis.variance_threshold;
    j["total_variance"] = basis.total_variance;
    auto comps = nlohmann::json::array();
    for (Eigen::Index c = 0; c < basis.components.cols(); ++c) comps.push_back(to_vec(basis.components.col(c)));
    j["components"] = comps;
    return j.dump(1);
}

FpcaBasis<double> basis_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("fpca basis: ") + e.what());
    }
    if (j.value("format", "") != kBasisFormat) throw DataError("fpca basis: unexpected format tag");
    if (j.value("version", 0) != kBasisVersion) throw DataError("fpca basis: unsupported version");
    FpcaBasis<double> b;
    b.grid = from_vec(j.at("grid").get<std::vector<double>>());
    b.mean_curve = from_vec(j.at("mean_curve").get<std::vector<double>>());
    b.eigenvalues = from_vec(j.at("eigenvalues").get<std::vector<double>>());
    b.quadrature_weight = j.at("quadrature_weight").get<double>();
    b.variance_threshold = j.at("variance_threshold").get<double>();
    b.total_variance = j.at("total_variance").get<double>();
    const auto& comps = j.at("components");
    b.components.resize(b.grid.size(), static_cast<Eigen::Index>(comps.size()));
    for (std::size_t c = 0; c < comps.size(); ++c) {
        auto col = comps[c].get<std::vector<double>>();
        if (static_cast<Eigen::Index>(col.size()) != b.grid.size()) throw DataError("fpca basis: component length");
        b.components.col(static_cast<Eigen::Index>(c)) = from_vec(col);
    }
    if (b.mean_curve.size() != b.grid.size() || b.eigenvalues.size() != b.components.cols())
        throw DataError("fpca basis: inconsistent shapes");
    return b;
}

void save_basis(const std::filesystem::path& path, const FpcaBasis<double>& basis) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << basis_to_json(basis) << '\n';
}

FpcaBasis<double> load_basis(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return basis_from_json(ss.str());
}

}  // namespace lobbench

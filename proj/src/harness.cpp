#include "lobbench/harness.hpp"

#include "lobbench/ensemble.hpp"
#include "lobbench/parallel.hpp"
#include "lobbench/preprocess.hpp"
#include "lobbench/svm.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lobbench {

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SynthConfig, n_events, seed, base_price, tick_size, spread_ticks_min,
                                                spread_ticks_max, spread_change_prob, move_prob, drift_per_event,
                                                trend_signal_strength, arrival_rate, window_length, volume_log_mean,
                                                volume_log_sd, first_date)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LabelingParams, alpha, k)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TrajectoryOptions, horizon_ns, grid_size)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EnetParams, lambda, alpha_star, max_iters, tol)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SvmParams, degree, c, tol, max_iters)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EnetGrid, lambdas, alphas)

using nlohmann::json;

std::string_view to_string(Setup s) {
    switch (s) {
        case Setup::baseline: return "baseline";
        case Setup::ensemble: return "ensemble";
        case Setup::within_window: return "within_window";
        case Setup::fpca: return "fpca";
    }
    return "?";
}

Setup parse_setup(std::string_view s) {
    for (auto v : kAllSetups)
        if (to_string(v) == s) return v;
    throw ParameterError("unknown setup '" + std::string(s) + "'");
}

bool uses_fpc(Setup s) { return s != Setup::within_window; }

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::within_window_recovery: return "I";
        case Strategy::sampling_ensemble: return "II";
        case Strategy::long_history_fpca: return "III";
    }
    return "?";
}

std::pair<Setup, Setup> strategy_setups(Strategy s) {
    switch (s) {
        case Strategy::within_window_recovery: return {Setup::baseline, Setup::fpca};
        case Strategy::sampling_ensemble: return {Setup::ensemble, Setup::baseline};
        case Strategy::long_history_fpca: return {Setup::baseline, Setup::within_window};
    }
    return {Setup::baseline, Setup::baseline};
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
    if (stocks.empty()) throw ParameterError("config: no stocks");
    std::set<std::string> names;
    for (const auto& s : stocks) {
        if (s.symbol.empty()) throw ParameterError("config: stock without a symbol");
        if (!names.insert(s.symbol).second) throw ParameterError("config: duplicate stock " + s.symbol);
        if (!s.file && !s.synth) throw ParameterError("config: stock " + s.symbol + " needs a file or synth settings");
        if (s.synth) s.synth->validate();
    }
    labeling.validate();
    if (train_size <= 0 || test_size <= 0) throw ParameterError("config: train_size and test_size must be positive");
    if (n_repeats <= 0) throw ParameterError("config: repeats must be positive");
    if (n_members <= 0) throw ParameterError("config: members must be positive");
    if (setups.empty()) throw ParameterError("config: setups must not be empty");
    std::set<Setup> seen;
    for (auto s : setups)
        if (!seen.insert(s).second) throw ParameterError("config: setup listed twice: " + std::string(to_string(s)));
    trajectory.validate();
    if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
        throw ParameterError("config: fpca.variance_threshold must lie in (0, 1]");
    if (learner == LearnerKind::enet) {
        if (grid.lambdas.empty() || grid.alphas.empty()) throw ParameterError("config: empty ENet grid");
        if (cv_folds < 2) throw ParameterError("config: enet.folds must be >= 2");
        for (double l : grid.lambdas) EnetParams{l, 0.5, enet.max_iters, enet.tol}.validate();
        for (double a : grid.alphas) EnetParams{0.0, a, enet.max_iters, enet.tol}.validate();
    } else {
        svm.validate();
    }
    if (failure_budget < 0) throw ParameterError("config: failure_budget must be >= 0");
}

bool ExperimentConfig::has(Setup s) const { return std::find(setups.begin(), setups.end(), s) != setups.end(); }

bool ExperimentConfig::needs_fpc() const { return std::any_of(setups.begin(), setups.end(), uses_fpc); }

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, out);
    if (ec != std::errc() || ptr != end) throw ParameterError("config: bad number for " + key + ": '" + value + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ParameterError("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
    ExperimentConfig cfg;
    double lambda_min = 1e-8, lambda_max = 5.0;
    int lambda_count = 100;
    std::vector<std::string> stock_order;
    std::map<std::string, std::string> stock_file;
    std::map<std::string, json> stock_synth;
    std::string columns;
    char delimiter = ',';
    bool header = false;
    const json synth_fields = SynthConfig{};

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ParameterError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "k") cfg.labeling.k = parse_number<int>(key, value);
        else if (key == "alpha") cfg.labeling.alpha = parse_number<double>(key, value);
        else if (key == "train_size") cfg.train_size = parse_number<Eigen::Index>(key, value);
        else if (key == "test_size") cfg.test_size = parse_number<Eigen::Index>(key, value);
        else if (key == "repeats") cfg.n_repeats = parse_number<int>(key, value);
        else if (key == "members") cfg.n_members = parse_number<int>(key, value);
        else if (key == "learner") cfg.learner = parse_learner(value);
        else if (key == "failure_budget") cfg.failure_budget = parse_number<int>(key, value);
        else if (key == "setups") {
            cfg.setups.clear();
            for (const auto& s : split_list(value)) cfg.setups.push_back(parse_setup(s));
        } else if (key == "fpca.grid_size") cfg.trajectory.grid_size = parse_number<int>(key, value);
        else if (key == "fpca.horizon_minutes")
            cfg.trajectory.horizon_ns = static_cast<std::int64_t>(parse_number<double>(key, value) * kNsPerMinute);
        else if (key == "fpca.variance_threshold") cfg.variance_threshold = parse_number<double>(key, value);
        else if (key == "enet.lambda_min") lambda_min = parse_number<double>(key, value);
        else if (key == "enet.lambda_max") lambda_max = parse_number<double>(key, value);
        else if (key == "enet.lambda_count") lambda_count = parse_number<int>(key, value);
        else if (key == "enet.alphas") {
            cfg.grid.alphas.clear();
            for (const auto& a : split_list(value)) cfg.grid.alphas.push_back(parse_number<double>(key, a));
        } else if (key == "enet.folds") cfg.cv_folds = parse_number<int>(key, value);
        else if (key == "enet.max_iters") cfg.enet.max_iters = parse_number<int>(key, value);
        else if (key == "enet.tol") cfg.enet.tol = parse_number<double>(key, value);
        else if (key == "svm.degree") cfg.svm.degree = parse_number<int>(key, value);
        else if (key == "svm.c") cfg.svm.c = parse_number<double>(key, value);
        else if (key == "svm.tol") cfg.svm.tol = parse_number<double>(key, value);
        else if (key == "svm.max_iters") cfg.svm.max_iters = parse_number<long>(key, value);
        else if (key == "input.columns") columns = value;
        else if (key == "input.delimiter") {
            if (value.size() != 1 && value != "\\t") throw ParameterError("config: input.delimiter must be one character");
            delimiter = value == "\\t" ? '\t' : value[0];
        } else if (key == "input.header") header = parse_bool(key, value);
        else if (key.rfind("stock.", 0) == 0) {
            const auto dot = key.find('.', 6);
            if (dot == std::string::npos) throw ParameterError("config: bad stock key " + key);
            const std::string symbol = key.substr(6, dot - 6);
            const std::string field = key.substr(dot + 1);
            if (std::find(stock_order.begin(), stock_order.end(), symbol) == stock_order.end())
                stock_order.push_back(symbol);
            if (field == "file") {
                stock_file[symbol] = value;
            } else if (field.rfind("synth.", 0) == 0) {
                const std::string name = field.substr(6);
                if (!synth_fields.contains(name)) throw ParameterError("config: unknown synth field " + name);
                json v;
                try {
                    v = json::parse(value);
                } catch (const json::exception&) {
                    throw ParameterError("config: bad value for " + key + ": '" + value + "'");
                }
                if (!v.is_number()) throw ParameterError("config: bad value for " + key + ": '" + value + "'");
                stock_synth[symbol][name] = v;
            } else {
                throw ParameterError("config: unknown stock field " + field);
            }
        } else {
            throw ParameterError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }

    cfg.grid.lambdas = EnetGrid::log_spaced(lambda_min, lambda_max, lambda_count);
    if (!columns.empty()) cfg.input_mapping = ColumnMapping::from_names(columns, delimiter, header);
    cfg.input_mapping.delimiter = delimiter;
    cfg.input_mapping.header = header;
    for (const auto& symbol : stock_order) {
        StockInput in;
        in.symbol = symbol;
        if (auto f = stock_file.find(symbol); f != stock_file.end()) {
            std::filesystem::path p = f->second;
            in.file = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        }
        if (auto s = stock_synth.find(symbol); s != stock_synth.end()) {
            json merged = SynthConfig{};
            merged.update(s->second);
            in.synth = merged.get<SynthConfig>();
        }
        cfg.stocks.push_back(std::move(in));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::filesystem::absolute(path).parent_path());
}

namespace {

json config_json(const ExperimentConfig& c) {
    json j;
    json stocks = json::array();
    for (const auto& s : c.stocks) {
        json e = {{"symbol", s.symbol}};
        if (s.file) e["file"] = s.file->string();
        if (s.synth) e["synth"] = *s.synth;
        stocks.push_back(e);
    }
    j["stocks"] = stocks;
    j["labeling"] = c.labeling;
    j["train_size"] = c.train_size;
    j["test_size"] = c.test_size;
    j["repeats"] = c.n_repeats;
    j["members"] = c.n_members;
    j["learner"] = std::string(to_string(c.learner));
    json setups = json::array();
    for (auto s : c.setups) setups.push_back(std::string(to_string(s)));
    j["setups"] = setups;
    j["trajectory"] = c.trajectory;
    j["variance_threshold"] = c.variance_threshold;
    j["grid"] = c.grid;
    j["cv_folds"] = c.cv_folds;
    j["enet"] = c.enet;
    j["svm"] = c.svm;
    json cols = json::array();
    for (auto col : c.input_mapping.columns) cols.push_back(std::string(column_name(col)));
    j["input"] = {{"columns", cols},
                  {"delimiter", std::string(1, c.input_mapping.delimiter)},
                  {"header", c.input_mapping.header}};
    j["seed"] = c.seed;
    j["failure_budget"] = c.failure_budget;
    return j;
}

ExperimentConfig config_from(const json& j) {
    ExperimentConfig c;
    for (const auto& e : j.at("stocks")) {
        StockInput s;
        s.symbol = e.at("symbol").get<std::string>();
        if (e.contains("file")) s.file = e.at("file").get<std::string>();
        if (e.contains("synth")) s.synth = e.at("synth").get<SynthConfig>();
        c.stocks.push_back(std::move(s));
    }
    c.labeling = j.at("labeling").get<LabelingParams>();
    c.train_size = j.at("train_size").get<Eigen::Index>();
    c.test_size = j.at("test_size").get<Eigen::Index>();
    c.n_repeats = j.at("repeats").get<int>();
    c.n_members = j.at("members").get<int>();
    c.learner = parse_learner(j.at("learner").get<std::string>());
    c.setups.clear();
    for (const auto& s : j.at("setups")) c.setups.push_back(parse_setup(s.get<std::string>()));
    c.trajectory = j.at("trajectory").get<TrajectoryOptions>();
    c.variance_threshold = j.at("variance_threshold").get<double>();
    c.grid = j.at("grid").get<EnetGrid>();
    c.cv_folds = j.at("cv_folds").get<int>();
    c.enet = j.at("enet").get<EnetParams>();
    c.svm = j.at("svm").get<SvmParams>();
    const auto& in = j.at("input");
    c.input_mapping.columns.clear();
    for (const auto& col : in.at("columns")) {
        auto parsed = parse_column_name(col.get<std::string>());
        if (!parsed) throw DataError("config: unknown column " + col.get<std::string>());
        c.input_mapping.columns.push_back(*parsed);
    }
    const auto delim = in.at("delimiter").get<std::string>();
    if (delim.size() != 1) throw DataError("config: bad delimiter");
    c.input_mapping.delimiter = delim[0];
    c.input_mapping.header = in.at("header").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.failure_budget = j.at("failure_budget").get<int>();
    return c;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex16(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(1); }

ExperimentConfig config_from_json(const std::string& text) {
    try {
        auto c = config_from(json::parse(text));
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw DataError(std::string("config: ") + e.what());
    }
}

std::string config_hash(const ExperimentConfig& config) { return hex16(fnv1a(config_json(config).dump())); }

std::string row_set_hash(std::span<const RowKey> keys) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& k : keys) {
        char buf[12];
        std::memcpy(buf, &k.date, 4);
        std::memcpy(buf + 4, &k.window_index, 8);
        h = fnv1a(std::string_view(buf, sizeof buf), h);
    }
    return hex16(h);
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

std::vector<QuoteEvent> load_stock(const StockInput& input, const ColumnMapping& mapping, CleaningReport* report) {
    if (!input.file) {
        if (!input.synth) throw ParameterError("stock " + input.symbol + " has neither file nor synth settings");
        return generate(*input.synth);
    }
    ParseResult parsed = parse_quote_file(*input.file, mapping);
    if (!parsed.errors.empty()) {
        const auto& e = parsed.errors.front();
        throw DataError(input.file->string() + ": " + std::to_string(parsed.errors.size()) +
                        " malformed lines, first at line " + std::to_string(e.line) + ": " + e.message);
    }
    auto by_symbol = split_by_symbol(std::move(parsed.records));
    std::vector<RawQuoteRecord> records;
    if (auto it = by_symbol.find(input.symbol); it != by_symbol.end())
        records = std::move(it->second);
    else if (by_symbol.size() == 1)
        records = std::move(by_symbol.begin()->second);
    else
        throw DataError(input.file->string() + ": no quotes for symbol " + input.symbol);
    CleanResult cleaned = clean(records);
    if (report) *report = cleaned.report;
    return std::move(cleaned.events);
}

const SetupResult* RepeatResult::find(Setup s) const {
    for (const auto& r : setups)
        if (r.setup == s) return &r;
    return nullptr;
}

std::vector<double> BenchmarkReport::deltas(int stock, Strategy s) const {
    const auto [plus, minus] = strategy_setups(s);
    std::vector<double> out;
    for (const auto& r : repeats) {
        if (r.stock != stock || !r.ok) continue;
        const auto* a = r.find(plus);
        const auto* b = r.find(minus);
        if (a && b) out.push_back(a->metrics.macro.f1 - b->metrics.macro.f1);
    }
    return out;
}

namespace {

// Rows available to the sampler plus, per row, the trajectory of the latest
// earlier day (when FPC features are in play).
struct StockData {
    Dataset rows;
    std::vector<int> source;
    std::vector<DayTrajectory> trajectories;
    Eigen::MatrixXd curves;  // trajectories x grid
};

StockData prepare_stock(const ExperimentConfig& cfg, const StockInput& input, StockSummary& summary) {
    CleaningReport cleaning;
    const auto events = load_stock(input, cfg.input_mapping, &cleaning);
    if (input.file)
        summary.diagnostics.push_back("cleaning: " + std::to_string(cleaning.total_in) + " in, " +
                                      std::to_string(cleaning.total_out) + " kept");
    StockData data;
    Dataset all = featurize(events, cfg.labeling);

    if (!cfg.needs_fpc()) {
        data.rows = std::move(all);
    } else {
        data.trajectories = build_trajectories(events, cfg.trajectory, &summary.diagnostics);
        std::vector<Eigen::Index> keep;
        for (Eigen::Index i = 0; i < all.rows(); ++i) {
            const auto date = all.keys[static_cast<std::size_t>(i)].date;
            const auto it = std::lower_bound(data.trajectories.begin(), data.trajectories.end(), date,
                                             [](const DayTrajectory& t, std::int32_t d) { return t.date < d; });
            if (it == data.trajectories.begin()) continue;
            keep.push_back(i);
            data.source.push_back(static_cast<int>(it - data.trajectories.begin()) - 1);
        }
        if (static_cast<Eigen::Index>(keep.size()) < all.rows())
            summary.diagnostics.push_back("fpca: " + std::to_string(all.rows() - static_cast<Eigen::Index>(keep.size())) +
                                          " rows without an earlier trading day dropped");
        data.rows = all.select_rows(keep);
        if (!data.trajectories.empty()) {
            const Eigen::Index g = data.trajectories.front().trajectory.values.size();
            data.curves.resize(static_cast<Eigen::Index>(data.trajectories.size()), g);
            for (std::size_t t = 0; t < data.trajectories.size(); ++t)
                data.curves.row(static_cast<Eigen::Index>(t)) = data.trajectories[t].trajectory.values.transpose();
        }
    }
    summary.rows = static_cast<std::size_t>(data.rows.rows());
    for (auto l : data.rows.y) ++summary.class_rows[class_index(l)];
    return data;
}

std::vector<FeatureId> setup_features(Setup s, int fpc_count) {
    std::vector<FeatureId> ids;
    if (s == Setup::baseline || s == Setup::ensemble || s == Setup::within_window) ids = within_window_ids();
    const auto level = window_level_ids();
    ids.insert(ids.end(), level.begin(), level.end());
    if (uses_fpc(s)) {
        const auto f = fpc_ids(fpc_count);
        ids.insert(ids.end(), f.begin(), f.end());
    }
    return ids;
}

struct RepeatOutput {
    RepeatResult result;
    std::optional<ImportanceReport> importance;
    std::vector<std::string> diagnostics;
};

RepeatOutput run_repeat(const ExperimentConfig& cfg, const StockData& data, int stock, int repeat) {
    using clock = std::chrono::steady_clock;
    RepeatOutput out;
    RepeatResult& res = out.result;
    res.stock = stock;
    res.repeat = repeat;
    res.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(stock), static_cast<std::uint64_t>(repeat));

    SamplingPlan plan;
    plan.train_size = cfg.train_size;
    plan.test_size = cfg.test_size;
    plan.seed = res.seed;
    const SampleSplit split = stratified_sample(data.rows.y, plan);

    // Feature matrix of the repeat: V1-V22 plus FPC scores from a basis fit on
    // the history of the train rows only.
    Dataset full = data.rows;
    if (cfg.needs_fpc()) {
        std::vector<int> used;
        for (auto r : split.train) used.push_back(data.source[static_cast<std::size_t>(r)]);
        std::sort(used.begin(), used.end());
        used.erase(std::unique(used.begin(), used.end()), used.end());
        if (used.size() < 2) throw DataError("fpca: train rows reference fewer than two days of history");
        std::vector<Trajectory<double>> history;
        for (int t : used) history.push_back(data.trajectories[static_cast<std::size_t>(t)].trajectory);
        const auto basis = fit_fpca<double>(history, cfg.variance_threshold, &out.diagnostics);
        const Eigen::MatrixXd scores = project_scores(data.curves, basis);
        Eigen::MatrixXd fpc(full.rows(), basis.count());
        for (Eigen::Index i = 0; i < full.rows(); ++i) fpc.row(i) = scores.row(data.source[static_cast<std::size_t>(i)]);
        full.append_columns(fpc_ids(static_cast<int>(basis.count())), fpc);
        res.fpc_count = static_cast<int>(basis.count());
    }

    const ColumnStats stats = fit_stats(full.select_rows(split.train));
    const Dataset train_all = transform(full.select_rows(split.train), stats);
    const Dataset test_all = transform(full.select_rows(split.test), stats);

    // ENet hyperparameters for the baseline features, shared by the baseline
    // model and the ensemble members. The search time is charged to the
    // baseline, or to the ensemble when it runs alone.
    const std::uint64_t cv_seed = derive_seed(res.seed, 1);
    std::optional<EnetCvResult> baseline_cv;
    double cv_seconds = 0.0;
    if (cfg.learner == LearnerKind::enet && (cfg.has(Setup::baseline) || cfg.has(Setup::ensemble))) {
        const auto t0 = clock::now();
        baseline_cv = enet_cv_fit(train_all.select_columns(setup_features(Setup::baseline, res.fpc_count)), cfg.grid,
                                  cfg.cv_folds, cv_seed, cfg.enet);
        cv_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    }
    std::vector<TrainedModel> selection_models;

    for (Setup setup : cfg.setups) {
        const auto ids = setup_features(setup, res.fpc_count);
        const Dataset train = train_all.select_columns(ids);
        const Dataset test = test_all.select_columns(ids);
        SetupResult sr;
        sr.setup = setup;
        sr.train_hash = row_set_hash(train.keys);
        sr.test_hash = row_set_hash(test.keys);
        const auto t0 = clock::now();

        std::vector<Label> predicted;
        const bool baseline_features = setup == Setup::baseline || setup == Setup::ensemble;
        LearnerSpec spec;
        spec.kind = cfg.learner;
        spec.svm = cfg.svm;
        if (cfg.learner == LearnerKind::enet && baseline_features)
            spec.enet = EnetParams{baseline_cv->lambda, baseline_cv->alpha_star, cfg.enet.max_iters, cfg.enet.tol};

        if (setup == Setup::ensemble) {
            std::vector<Eigen::Index> pool_rows;
            std::size_t t = 0;
            for (Eigen::Index r = 0; r < full.rows(); ++r) {
                if (t < split.test.size() && split.test[t] == r) {
                    ++t;
                    continue;
                }
                pool_rows.push_back(r);
            }
            const Dataset pool = transform(full.select_rows(pool_rows), stats).select_columns(ids);
            EnsembleOptions opts;
            opts.n_members = cfg.n_members;
            opts.plan_template = plan;
            opts.plan_template.seed = derive_seed(res.seed, 2);
            opts.learner = spec;
            EnsembleModel ens = ensemble_fit(pool, opts);
            ens.stats = stats;
            predicted = ensemble_predict(ens, test);
            sr.voting_members = ens.voting_members();
            sr.failed_members = ens.failed_members();
            if (sr.failed_members > 0)
                out.diagnostics.push_back("ensemble: " + std::to_string(sr.failed_members) + " members failed");
            sr.converged = true;
            for (auto& m : ens.members) {
                if (!m.model) continue;
                sr.converged = sr.converged && m.model->converged;
                if (cfg.learner == LearnerKind::enet) selection_models.push_back(std::move(*m.model));
            }
            if (cfg.learner == LearnerKind::enet) {
                sr.lambda = spec.enet.lambda;
                sr.alpha_star = spec.enet.alpha_star;
            }
        } else {
            TrainedModel model;
            if (cfg.learner == LearnerKind::enet) {
                if (setup == Setup::baseline) {
                    model = baseline_cv->model;
                    sr.lambda = baseline_cv->lambda;
                    sr.alpha_star = baseline_cv->alpha_star;
                } else {
                    auto cv = enet_cv_fit(train, cfg.grid, cfg.cv_folds, cv_seed, cfg.enet);
                    model = std::move(cv.model);
                    sr.lambda = cv.lambda;
                    sr.alpha_star = cv.alpha_star;
                }
            } else {
                model = svm_fit(train, cfg.svm);
            }
            model.stats = stats;
            predicted = predict(model, test);
            sr.converged = model.converged;
            if (cfg.learner == LearnerKind::enet && setup == Setup::baseline) selection_models.push_back(model);
        }
        sr.fit_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        if (baseline_cv && (setup == Setup::baseline || (setup == Setup::ensemble && !cfg.has(Setup::baseline))))
            sr.fit_seconds += cv_seconds;
        sr.metrics = score(predicted, test.y);
        res.setups.push_back(std::move(sr));
    }

    if (!selection_models.empty()) {
        std::vector<const TrainedModel*> ptrs;
        for (const auto& m : selection_models) ptrs.push_back(&m);
        out.importance = importance(ptrs);
    }
    res.ok = true;
    return out;
}

// Pools per-repeat selection counts into one report.
ImportanceReport merge_importance(std::span<const ImportanceReport> parts) {
    ImportanceReport out;
    for (const auto& p : parts) out.features.insert(out.features.end(), p.features.begin(), p.features.end());
    std::sort(out.features.begin(), out.features.end());
    out.features.erase(std::unique(out.features.begin(), out.features.end()), out.features.end());
    Eigen::MatrixXd selected = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.features.size()), kNumClasses);
    for (const auto& p : parts) {
        out.models += p.models;
        for (std::size_t f = 0; f < p.features.size(); ++f) {
            const auto row =
                std::lower_bound(out.features.begin(), out.features.end(), p.features[f]) - out.features.begin();
            for (int c = 0; c < kNumClasses; ++c)
                selected(row, c) += std::round(p.fraction(static_cast<Eigen::Index>(f), c) * p.models);
        }
    }
    out.fraction = selected / static_cast<double>(std::max(out.models, 1));
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

BenchmarkReport run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    config.validate();
    BenchmarkReport report;
    report.config = config;
    const int n_stocks = static_cast<int>(config.stocks.size());
    report.stocks.resize(static_cast<std::size_t>(n_stocks));

    std::vector<StockData> data(static_cast<std::size_t>(n_stocks));
    std::vector<std::string> load_error(static_cast<std::size_t>(n_stocks));
    parallel_for(data.size(), options.jobs, [&](std::size_t s) {
        report.stocks[s].symbol = config.stocks[s].symbol;
        try {
            data[s] = prepare_stock(config, config.stocks[s], report.stocks[s]);
        } catch (const std::exception& e) {
            load_error[s] = e.what();
        }
    });

    const auto per_stock = static_cast<std::size_t>(config.n_repeats);
    std::vector<RepeatOutput> outputs(data.size() * per_stock);
    parallel_for(outputs.size(), options.jobs, [&](std::size_t job) {
        const int s = static_cast<int>(job / per_stock);
        const int r = static_cast<int>(job % per_stock);
        auto& out = outputs[job];
        if (!load_error[static_cast<std::size_t>(s)].empty()) {
            out.result.stock = s;
            out.result.repeat = r;
            out.result.seed = derive_seed(config.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r));
            out.result.error = load_error[static_cast<std::size_t>(s)];
            return;
        }
        try {
            out = run_repeat(config, data[static_cast<std::size_t>(s)], s, r);
        } catch (const std::exception& e) {
            out = RepeatOutput{};
            out.result.stock = s;
            out.result.repeat = r;
            out.result.seed = derive_seed(config.seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(r));
            out.result.error = e.what();
        }
    });

    std::vector<std::vector<ImportanceReport>> parts(data.size());
    for (auto& out : outputs) {
        const auto s = static_cast<std::size_t>(out.result.stock);
        auto& diag = report.stocks[s].diagnostics;
        for (auto& d : out.diagnostics) diag.push_back("repeat " + std::to_string(out.result.repeat) + ": " + d);
        if (!out.result.ok) {
            ++report.failed_repeats;
            diag.push_back("repeat " + std::to_string(out.result.repeat) + " failed: " + out.result.error);
        }
        if (out.importance) parts[s].push_back(std::move(*out.importance));
        report.repeats.push_back(std::move(out.result));
    }
    for (std::size_t s = 0; s < data.size(); ++s)
        if (!parts[s].empty()) report.stocks[s].importance = merge_importance(parts[s]);

    std::vector<double> raw;
    for (int s = 0; s < n_stocks; ++s)
        for (auto strategy : kAllStrategies) {
            const auto [plus, minus] = strategy_setups(strategy);
            if (!config.has(plus) || !config.has(minus)) continue;
            const auto d = report.deltas(s, strategy);
            if (d.empty()) continue;
            SignificanceRow row;
            row.symbol = config.stocks[static_cast<std::size_t>(s)].symbol;
            row.strategy = strategy;
            row.test = wilcoxon_signed_rank(d);
            row.median_delta = median(d);
            raw.push_back(row.test.p);
            report.significance.push_back(std::move(row));
        }
    const auto adjusted = fdr_adjust(raw);
    for (std::size_t i = 0; i < adjusted.size(); ++i) report.significance[i].p_adjusted = adjusted[i];
    if (options.log)
        for (const auto& st : report.stocks)
            for (const auto& d : st.diagnostics) options.log->push_back(st.symbol + ": " + d);
    return report;
}

}  // namespace lobbench

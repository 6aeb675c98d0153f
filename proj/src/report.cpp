#include "lobbench/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace lobbench {

using nlohmann::json;

namespace {

constexpr const char* kResultsFormat = "lobbench.results";
constexpr const char* kManifestFormat = "lobbench.manifest";
constexpr int kReportVersion = 1;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string num(double v) { return format_double(v); }

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

json metrics_json(const MetricsReport& m) {
    json table = json::array();
    for (int r = 0; r < kNumClasses; ++r) {
        json row = json::array();
        for (int c = 0; c < kNumClasses; ++c) row.push_back(m.counts.table(r, c));
        table.push_back(row);
    }
    return table;
}

MetricsReport metrics_from(const json& table) {
    ConfusionCounts counts;
    for (int r = 0; r < kNumClasses; ++r)
        for (int c = 0; c < kNumClasses; ++c)
            counts.table(r, c) = table.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<std::int64_t>();
    return metrics_from_counts(counts);
}

Strategy parse_strategy(const std::string& s) {
    for (auto v : kAllStrategies)
        if (to_string(v) == s) return v;
    throw DataError("unknown strategy '" + s + "'");
}

void write_timings(const BenchmarkReport& report, const std::filesystem::path& outdir) {
    auto out = open_out(outdir / "timings.csv");
    out << "stock,setup,repeat,fit_seconds\n";
    for (const auto& r : report.repeats)
        for (const auto& s : r.setups)
            out << report.stocks[static_cast<std::size_t>(r.stock)].symbol << ',' << to_string(s.setup) << ','
                << r.repeat << ',' << num(s.fit_seconds) << '\n';

    auto sum = open_out(outdir / "timing_summary.csv");
    sum << "stock,setup,fits,median_fit_seconds\n";
    for (std::size_t st = 0; st < report.stocks.size(); ++st)
        for (auto setup : report.config.setups) {
            std::vector<double> t;
            for (const auto& r : report.repeats)
                if (r.stock == static_cast<int>(st))
                    if (const auto* s = r.find(setup)) t.push_back(s->fit_seconds);
            sum << report.stocks[st].symbol << ',' << to_string(setup) << ',' << t.size() << ','
                << (t.empty() ? "" : num(median(t))) << '\n';
        }
}

// Fills fit_seconds from a timings.csv written by emit_reports.
void read_timings(BenchmarkReport& report, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return;
    std::map<std::string, int> stock_index;
    for (std::size_t s = 0; s < report.stocks.size(); ++s) stock_index[report.stocks[s].symbol] = static_cast<int>(s);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string stock, setup, repeat, seconds;
        if (!std::getline(ss, stock, ',') || !std::getline(ss, setup, ',') || !std::getline(ss, repeat, ',') ||
            !std::getline(ss, seconds))
            continue;
        const auto it = stock_index.find(stock);
        if (it == stock_index.end()) continue;
        for (auto& r : report.repeats)
            if (r.stock == it->second && std::to_string(r.repeat) == repeat)
                for (auto& s : r.setups)
                    if (to_string(s.setup) == setup) s.fit_seconds = std::stod(seconds);
    }
}

}  // namespace

std::string report_to_json(const BenchmarkReport& report) {
    json j;
    j["format"] = kResultsFormat;
    j["version"] = kReportVersion;
    j["config"] = json::parse(config_to_json(report.config));
    j["failed_repeats"] = report.failed_repeats;

    json stocks = json::array();
    for (const auto& s : report.stocks) {
        json e = {{"symbol", s.symbol}, {"rows", s.rows}, {"class_rows", s.class_rows}, {"diagnostics", s.diagnostics}};
        if (s.importance) {
            json feats = json::array();
            json frac = json::array();
            for (std::size_t f = 0; f < s.importance->features.size(); ++f) {
                feats.push_back(s.importance->features[f].name());
                const auto row = s.importance->fraction.row(static_cast<Eigen::Index>(f));
                frac.push_back({row(0), row(1), row(2)});
            }
            e["importance"] = {{"features", feats},
                               {"fraction", frac},
                               {"models", s.importance->models},
                               {"threshold", s.importance->threshold}};
        }
        stocks.push_back(std::move(e));
    }
    j["stocks"] = stocks;

    json repeats = json::array();
    for (const auto& r : report.repeats) {
        json setups = json::array();
        for (const auto& s : r.setups)
            setups.push_back({{"setup", std::string(to_string(s.setup))},
                              {"confusion", metrics_json(s.metrics)},
                              {"converged", s.converged},
                              {"lambda", s.lambda},
                              {"alpha_star", s.alpha_star},
                              {"voting_members", s.voting_members},
                              {"failed_members", s.failed_members},
                              {"train_hash", s.train_hash},
                              {"test_hash", s.test_hash}});
        repeats.push_back({{"stock", r.stock},
                           {"repeat", r.repeat},
                           {"seed", r.seed},
                           {"ok", r.ok},
                           {"error", r.error},
                           {"fpc_count", r.fpc_count},
                           {"setups", setups}});
    }
    j["repeats"] = repeats;

    json sig = json::array();
    for (const auto& s : report.significance)
        sig.push_back({{"symbol", s.symbol},
                       {"strategy", std::string(to_string(s.strategy))},
                       {"n", s.test.n},
                       {"w", s.test.w},
                       {"p", s.test.p},
                       {"exact", s.test.exact},
                       {"diagnostic", s.test.diagnostic},
                       {"median_delta", s.median_delta},
                       {"p_adjusted", s.p_adjusted}});
    j["significance"] = sig;
    return j.dump(1);
}

BenchmarkReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("results: ") + e.what());
    }
    if (j.value("format", "") != kResultsFormat) throw DataError("results: unexpected format tag");
    if (j.value("version", 0) != kReportVersion) throw DataError("results: unsupported version");
    try {
        BenchmarkReport report;
        report.config = config_from_json(j.at("config").dump());
        report.failed_repeats = j.at("failed_repeats").get<int>();
        for (const auto& e : j.at("stocks")) {
            StockSummary s;
            s.symbol = e.at("symbol").get<std::string>();
            s.rows = e.at("rows").get<std::size_t>();
            s.class_rows = e.at("class_rows").get<std::array<std::size_t, kNumClasses>>();
            s.diagnostics = e.at("diagnostics").get<std::vector<std::string>>();
            if (e.contains("importance")) {
                const auto& im = e.at("importance");
                ImportanceReport rep;
                for (const auto& f : im.at("features")) rep.features.push_back(FeatureId::parse(f.get<std::string>()));
                rep.fraction.resize(static_cast<Eigen::Index>(rep.features.size()), kNumClasses);
                const auto& frac = im.at("fraction");
                for (std::size_t f = 0; f < rep.features.size(); ++f)
                    for (int c = 0; c < kNumClasses; ++c)
                        rep.fraction(static_cast<Eigen::Index>(f), c) = frac.at(f).at(static_cast<std::size_t>(c)).get<double>();
                rep.models = im.at("models").get<int>();
                rep.threshold = im.at("threshold").get<double>();
                s.importance = std::move(rep);
            }
            report.stocks.push_back(std::move(s));
        }
        for (const auto& e : j.at("repeats")) {
            RepeatResult r;
            r.stock = e.at("stock").get<int>();
            r.repeat = e.at("repeat").get<int>();
            r.seed = e.at("seed").get<std::uint64_t>();
            r.ok = e.at("ok").get<bool>();
            r.error = e.at("error").get<std::string>();
            r.fpc_count = e.at("fpc_count").get<int>();
            for (const auto& se : e.at("setups")) {
                SetupResult s;
                s.setup = parse_setup(se.at("setup").get<std::string>());
                s.metrics = metrics_from(se.at("confusion"));
                s.converged = se.at("converged").get<bool>();
                s.lambda = se.at("lambda").get<double>();
                s.alpha_star = se.at("alpha_star").get<double>();
                s.voting_members = se.at("voting_members").get<int>();
                s.failed_members = se.at("failed_members").get<int>();
                s.train_hash = se.at("train_hash").get<std::string>();
                s.test_hash = se.at("test_hash").get<std::string>();
                r.setups.push_back(std::move(s));
            }
            report.repeats.push_back(std::move(r));
        }
        for (const auto& e : j.at("significance")) {
            SignificanceRow s;
            s.symbol = e.at("symbol").get<std::string>();
            s.strategy = parse_strategy(e.at("strategy").get<std::string>());
            s.test.n = e.at("n").get<int>();
            s.test.w = e.at("w").get<double>();
            s.test.p = e.at("p").get<double>();
            s.test.exact = e.at("exact").get<bool>();
            s.test.diagnostic = e.at("diagnostic").get<std::string>();
            s.median_delta = e.at("median_delta").get<double>();
            s.p_adjusted = e.at("p_adjusted").get<double>();
            report.significance.push_back(std::move(s));
        }
        return report;
    } catch (const json::exception& e) {
        throw DataError(std::string("results: ") + e.what());
    }
}

BenchmarkReport load_results(const std::filesystem::path& results_json) {
    std::ifstream in(results_json);
    if (!in) throw DataError("cannot read " + results_json.string());
    std::stringstream ss;
    ss << in.rdbuf();
    BenchmarkReport report = report_from_json(ss.str());
    read_timings(report, results_json.parent_path() / "timings.csv");
    return report;
}

void emit_reports(const BenchmarkReport& report, const std::filesystem::path& outdir) {
    std::error_code ec;
    std::filesystem::create_directories(outdir, ec);
    if (ec) throw DataError("cannot create " + outdir.string() + ": " + ec.message());
    const auto& cfg = report.config;
    auto symbol = [&](int s) -> const std::string& { return report.stocks[static_cast<std::size_t>(s)].symbol; };

    {
        auto out = open_out(outdir / "metrics.csv");
        out << "stock,setup,repeats,median_precision,median_recall,median_f1,median_f1_downwards,"
               "median_f1_stationary,median_f1_upwards\n";
        for (std::size_t st = 0; st < report.stocks.size(); ++st)
            for (auto setup : cfg.setups) {
                std::vector<double> p, r, f, fc[kNumClasses];
                for (const auto& rep : report.repeats) {
                    if (rep.stock != static_cast<int>(st) || !rep.ok) continue;
                    if (const auto* s = rep.find(setup)) {
                        p.push_back(s->metrics.macro.precision);
                        r.push_back(s->metrics.macro.recall);
                        f.push_back(s->metrics.macro.f1);
                        for (int c = 0; c < kNumClasses; ++c) fc[c].push_back(s->metrics.per_class[c].f1);
                    }
                }
                out << report.stocks[st].symbol << ',' << to_string(setup) << ',' << f.size();
                if (f.empty()) {
                    out << ",,,,,,\n";
                    continue;
                }
                out << ',' << num(median(p)) << ',' << num(median(r)) << ',' << num(median(f));
                for (auto& v : fc) out << ',' << num(median(v));
                out << '\n';
            }
    }
    {
        auto out = open_out(outdir / "metrics_by_repeat.csv");
        out << "stock,setup,repeat,precision,recall,f1,f1_downwards,f1_stationary,f1_upwards,converged,lambda,"
               "alpha_star,fpc_count,voting_members,failed_members\n";
        for (const auto& rep : report.repeats) {
            if (!rep.ok) continue;
            for (const auto& s : rep.setups) {
                out << symbol(rep.stock) << ',' << to_string(s.setup) << ',' << rep.repeat << ','
                    << num(s.metrics.macro.precision) << ',' << num(s.metrics.macro.recall) << ','
                    << num(s.metrics.macro.f1);
                for (const auto& c : s.metrics.per_class) out << ',' << num(c.f1);
                out << ',' << (s.converged ? "true" : "false") << ',' << num(s.lambda) << ',' << num(s.alpha_star)
                    << ',' << rep.fpc_count << ',' << s.voting_members << ',' << s.failed_members << '\n';
            }
        }
    }
    {
        auto out = open_out(outdir / "f1_deltas.csv");
        out << "stock,strategy,repeat,f1_delta\n";
        for (std::size_t st = 0; st < report.stocks.size(); ++st)
            for (auto strategy : kAllStrategies) {
                const auto [plus, minus] = strategy_setups(strategy);
                for (const auto& rep : report.repeats) {
                    if (rep.stock != static_cast<int>(st) || !rep.ok) continue;
                    const auto* a = rep.find(plus);
                    const auto* b = rep.find(minus);
                    if (!a || !b) continue;
                    out << report.stocks[st].symbol << ',' << to_string(strategy) << ',' << rep.repeat << ','
                        << num(a->metrics.macro.f1 - b->metrics.macro.f1) << '\n';
                }
            }
    }
    {
        auto out = open_out(outdir / "significance.csv");
        out << "stock,strategy,n,w,p_raw,p_adjusted,exact,median_delta,diagnostic\n";
        for (const auto& s : report.significance)
            out << s.symbol << ',' << to_string(s.strategy) << ',' << s.test.n << ',' << num(s.test.w) << ','
                << num(s.test.p) << ',' << num(s.p_adjusted) << ',' << (s.test.exact ? "true" : "false") << ','
                << num(s.median_delta) << ',' << s.test.diagnostic << '\n';

        // Stock x strategy grid of adjusted p-values.
        auto table = open_out(outdir / "significance_table.csv");
        table << "stock,I,II,III\n";
        for (const auto& st : report.stocks) {
            table << st.symbol;
            for (auto strategy : kAllStrategies) {
                table << ',';
                for (const auto& s : report.significance)
                    if (s.symbol == st.symbol && s.strategy == strategy) table << num(s.p_adjusted);
            }
            table << '\n';
        }
    }
    {
        auto out = open_out(outdir / "importance.csv");
        out << "stock,feature,class,fraction,models,high_impact\n";
        std::vector<ImportanceReport> reps;
        for (const auto& st : report.stocks) {
            if (!st.importance) continue;
            const auto& im = *st.importance;
            for (std::size_t f = 0; f < im.features.size(); ++f)
                for (int c = 0; c < kNumClasses; ++c)
                    out << st.symbol << ',' << im.features[f].name() << ',' << to_string(label_from_index(c)) << ','
                        << num(im.fraction(static_cast<Eigen::Index>(f), c)) << ',' << im.models << ','
                        << (im.high_impact(static_cast<Eigen::Index>(f), c) ? "true" : "false") << '\n';
            reps.push_back(im);
        }
        auto hist = open_out(outdir / "importance_histogram.csv");
        hist << "feature,class,stocks_high_impact,stocks\n";
        const auto counts = high_impact_counts(reps);
        for (std::size_t f = 0; f < counts.features.size(); ++f)
            for (int c = 0; c < kNumClasses; ++c)
                hist << counts.features[f].name() << ',' << to_string(label_from_index(c)) << ','
                     << counts.counts(static_cast<Eigen::Index>(f), c) << ',' << reps.size() << '\n';
    }
    write_timings(report, outdir);
    {
        auto out = open_out(outdir / "results.json");
        out << report_to_json(report) << '\n';
    }
    {
        json m;
        m["format"] = kManifestFormat;
        m["version"] = kReportVersion;
        m["code_version"] = std::string(kCodeVersion);
        m["config_hash"] = config_hash(cfg);
        m["config"] = json::parse(config_to_json(cfg));
        json reps = json::array();
        for (const auto& r : report.repeats) {
            json setups = json::object();
            for (const auto& s : r.setups)
                setups[std::string(to_string(s.setup))] = {{"train_hash", s.train_hash}, {"test_hash", s.test_hash}};
            reps.push_back({{"stock", symbol(r.stock)},
                            {"repeat", r.repeat},
                            {"seed", r.seed},
                            {"ok", r.ok},
                            {"setups", setups}});
        }
        m["repeats"] = reps;
        m["failed_repeats"] = report.failed_repeats;
        m["timings"] = "timings.csv";
        m["files"] = {"metrics.csv",        "metrics_by_repeat.csv",    "f1_deltas.csv", "significance.csv",
                      "significance_table.csv", "importance.csv",      "importance_histogram.csv",
                      "timings.csv",        "timing_summary.csv",       "results.json"};
        auto out = open_out(outdir / "manifest.json");
        out << m.dump(1) << '\n';
    }
}

}  // namespace lobbench

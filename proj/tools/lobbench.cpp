#include "lobbench/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace lobbench;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Writes to `path`, or stdout for "" / "-".
template <typename F>
void with_output(const std::string& path, F&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    write(out);
    if (!out) throw DataError("write failed: " + path);
}

struct InputFlags {
    std::string file;
    std::string symbol;
    std::string columns;
    std::string delimiter = ",";
    bool no_header = false;

    void add(CLI::App* cmd) {
        cmd->add_option("input", file, "Quote file")->required()->check(CLI::ExistingFile);
        cmd->add_option("--symbol", symbol, "Symbol to keep when the file holds several");
        cmd->add_option("--columns", columns, "Column order, e.g. timestamp_ns,bid_price,ask_price,bid_size,ask_size,symbol");
        cmd->add_option("--delimiter", delimiter, "Field delimiter (one character, or \\t)");
        cmd->add_flag("--no-header", no_header, "The file has no header line");
    }

    ColumnMapping mapping() const {
        if (delimiter.size() != 1 && delimiter != "\\t") throw ParameterError("--delimiter must be one character");
        const char d = delimiter == "\\t" ? '\t' : delimiter[0];
        ColumnMapping m = columns.empty() ? ColumnMapping{} : ColumnMapping::from_names(columns, d, !no_header);
        m.delimiter = d;
        m.header = !no_header;
        return m;
    }

    StockInput stock() const { return {symbol, std::filesystem::path(file), std::nullopt}; }
};

void print_log(const std::vector<std::string>& log) {
    for (const auto& line : log) std::cerr << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mid-price movement benchmark over depth-1 quote data"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic quote stream");
    SynthConfig sc;
    std::string synth_out, synth_symbol = "SYN";
    synth->set_config("--config", "", "key = value file with any of the options below");
    synth->add_option("--n_events", sc.n_events, "Number of events")->capture_default_str();
    synth->add_option("--seed", sc.seed, "Random seed")->capture_default_str();
    synth->add_option("--base_price", sc.base_price)->capture_default_str();
    synth->add_option("--tick_size", sc.tick_size)->capture_default_str();
    synth->add_option("--spread_ticks_min", sc.spread_ticks_min)->capture_default_str();
    synth->add_option("--spread_ticks_max", sc.spread_ticks_max)->capture_default_str();
    synth->add_option("--spread_change_prob", sc.spread_change_prob)->capture_default_str();
    synth->add_option("--move_prob", sc.move_prob)->capture_default_str();
    synth->add_option("--drift_per_event", sc.drift_per_event)->capture_default_str();
    synth->add_option("--trend_signal_strength", sc.trend_signal_strength)->capture_default_str();
    synth->add_option("--arrival_rate", sc.arrival_rate, "Events per second")->capture_default_str();
    synth->add_option("--window_length", sc.window_length)->capture_default_str();
    synth->add_option("--volume_log_mean", sc.volume_log_mean)->capture_default_str();
    synth->add_option("--volume_log_sd", sc.volume_log_sd)->capture_default_str();
    synth->add_option("--first_date", sc.first_date)->capture_default_str();
    synth->add_option("--symbol", synth_symbol)->capture_default_str();
    synth->add_option("--out", synth_out, "Output file (stdout when omitted)");

    // clean
    auto* clean_cmd = app.add_subcommand("clean", "Parse and clean a quote file");
    InputFlags clean_in;
    clean_in.add(clean_cmd);
    std::string clean_out, clean_report;
    clean_cmd->add_option("--out", clean_out, "Cleaned quotes (stdout when omitted)");
    clean_cmd->add_option("--report", clean_report, "Cleaning report as JSON");

    // featurize
    auto* feat = app.add_subcommand("featurize", "Clean a quote file and write V1-V22 with labels");
    InputFlags feat_in;
    feat_in.add(feat);
    LabelingParams labeling;
    std::string feat_out;
    feat->add_option("--k", labeling.k, "Events per window")->capture_default_str();
    feat->add_option("--alpha", labeling.alpha, "Stationary band half-width")->capture_default_str();
    feat->add_option("--out", feat_out, "Feature table (stdout when omitted)");

    // experiment
    auto* exp = app.add_subcommand("experiment", "Run the benchmark and write all reports");
    std::string exp_config, exp_manifest, exp_out = "results";
    std::optional<std::uint64_t> exp_seed;
    int jobs = 1;
    auto* cfg_opt = exp->add_option("config", exp_config, "Experiment config (key = value)")->check(CLI::ExistingFile);
    auto* man_opt =
        exp->add_option("--manifest", exp_manifest, "Rerun the configuration recorded in a manifest.json")
            ->check(CLI::ExistingFile);
    cfg_opt->excludes(man_opt);
    exp->add_option("--seed", exp_seed, "Override the master seed");
    exp->add_option("--out", exp_out, "Output directory")->capture_default_str();
    exp->add_option("--jobs", jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

    // report
    auto* rep = app.add_subcommand("report", "Regenerate report tables from results.json");
    std::string rep_in, rep_out;
    rep->add_option("results", rep_in, "results.json from an experiment")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", rep_out, "Output directory (defaults to the results directory)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*synth) {
            sc.validate();
            const auto events = generate(sc);
            with_output(synth_out, [&](std::ostream& out) { write_quotes(out, events, synth_symbol); });
            std::cerr << "synth: " << events.size() << " events\n";
        } else if (*clean_cmd) {
            ParseResult parsed = parse_quote_file(clean_in.file, clean_in.mapping());
            for (const auto& e : parsed.errors) std::cerr << "line " << e.line << ": " << e.message << '\n';
            auto by_symbol = split_by_symbol(std::move(parsed.records));
            if (!clean_in.symbol.empty()) {
                auto it = by_symbol.find(clean_in.symbol);
                if (it == by_symbol.end()) throw DataError("no quotes for symbol " + clean_in.symbol);
                auto kept = std::move(it->second);
                by_symbol.clear();
                by_symbol.emplace(clean_in.symbol, std::move(kept));
            }
            nlohmann::json reports = nlohmann::json::object();
            with_output(clean_out, [&](std::ostream& out) {
                bool first = true;
                for (const auto& [symbol, records] : by_symbol) {
                    const CleanResult cleaned = clean(records);
                    std::ostringstream text;
                    write_quotes(text, cleaned.events, symbol);
                    const std::string s = text.str();
                    out << (first ? std::string_view(s) : std::string_view(s).substr(s.find('\n') + 1));
                    first = false;
                    reports[symbol] = nlohmann::json::parse(cleaned.report.to_json());
                    std::cerr << "clean " << symbol << ": " << cleaned.report.total_in << " in, "
                              << cleaned.report.total_out << " kept\n";
                }
            });
            if (!clean_report.empty())
                with_output(clean_report, [&](std::ostream& out) { out << reports.dump(1) << '\n'; });
            if (!parsed.errors.empty()) {
                std::cerr << "clean: " << parsed.errors.size() << " malformed lines skipped\n";
                return 1;
            }
        } else if (*feat) {
            labeling.validate();
            const auto events = load_stock(feat_in.stock(), feat_in.mapping());
            const Dataset data = featurize(events, labeling);
            with_output(feat_out, [&](std::ostream& out) { write_feature_csv(out, data); });
            std::cerr << "featurize: " << data.rows() << " rows\n";
        } else if (*exp) {
            ExperimentConfig cfg;
            if (!exp_manifest.empty()) {
                const auto manifest = nlohmann::json::parse(read_file(exp_manifest));
                cfg = config_from_json(manifest.at("config").dump());
            } else if (!exp_config.empty()) {
                cfg = load_config(exp_config);
            } else {
                throw ParameterError("experiment: give a config file or --manifest");
            }
            if (exp_seed) cfg.seed = *exp_seed;
            cfg.validate();
            std::vector<std::string> log;
            const BenchmarkReport report = run_experiment(cfg, {jobs, &log});
            print_log(log);
            emit_reports(report, exp_out);
            std::cerr << "experiment: " << report.repeats.size() << " repeats, " << report.failed_repeats
                      << " failed; reports in " << exp_out << '\n';
            return report.success() ? 0 : 1;
        } else if (*rep) {
            const BenchmarkReport report = load_results(rep_in);
            const std::filesystem::path out =
                rep_out.empty() ? std::filesystem::path(rep_in).parent_path() : std::filesystem::path(rep_out);
            emit_reports(report, out.empty() ? "." : out);
            return report.success() ? 0 : 1;
        }
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

#pragma once

#include "lobbench/enet.hpp"
#include "lobbench/fpca.hpp"
#include "lobbench/ingest.hpp"
#include "lobbench/metrics.hpp"
#include "lobbench/stats.hpp"
#include "lobbench/synth.hpp"
#include "lobbench/windowing.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lobbench {

inline constexpr std::string_view kCodeVersion = "0.1.0";

// Feature sets compared by the benchmark.
//   baseline      V1-V22 + FPC scores
//   ensemble      baseline features, voting over stratified subsets
//   within_window V1-V22
//   fpca          V11-V22 + FPC scores
enum class Setup { baseline, ensemble, within_window, fpca };
inline constexpr std::array<Setup, 4> kAllSetups = {Setup::baseline, Setup::ensemble, Setup::within_window,
                                                    Setup::fpca};

std::string_view to_string(Setup s);
Setup parse_setup(std::string_view s);
bool uses_fpc(Setup s);

// Paired comparisons; each delta is F1(minuend) - F1(subtrahend) per repeat.
//   I   baseline - fpca           (within-window recovery)
//   II  ensemble - baseline       (sampling + ensemble)
//   III baseline - within_window  (long-history FPCA)
enum class Strategy { within_window_recovery, sampling_ensemble, long_history_fpca };
inline constexpr std::array<Strategy, 3> kAllStrategies = {
    Strategy::within_window_recovery, Strategy::sampling_ensemble, Strategy::long_history_fpca};

std::string_view to_string(Strategy s);  // "I", "II", "III"
std::pair<Setup, Setup> strategy_setups(Strategy s);

struct StockInput {
    std::string symbol;
    std::optional<std::filesystem::path> file;  // raw quotes, cleaned on load
    std::optional<SynthConfig> synth;           // used when no file is given
};

struct ExperimentConfig {
    std::vector<StockInput> stocks;
    LabelingParams labeling;
    Eigen::Index train_size = 8000;
    Eigen::Index test_size = 2000;
    int n_repeats = 100;
    int n_members = 100;
    LearnerKind learner = LearnerKind::svm;
    std::vector<Setup> setups = {Setup::baseline, Setup::ensemble, Setup::within_window, Setup::fpca};
    TrajectoryOptions trajectory;
    double variance_threshold = 0.999;
    // ENet model selection
    EnetGrid grid = EnetGrid::standard();
    int cv_folds = 5;
    EnetParams enet;  // max_iters and tol; lambda and alpha come from the grid search
    SvmParams svm;
    ColumnMapping input_mapping;
    std::uint64_t seed = 1;
    int failure_budget = 0;  // failed repeats tolerated before the run counts as failed

    void validate() const;
    bool has(Setup s) const;
    bool needs_fpc() const;
};

// Key/value text format, one `key = value` per line, `#` starts a comment:
//
//   seed = 42
//   k = 5
//   alpha = 1e-5
//   train_size = 2000
//   test_size = 500
//   repeats = 20
//   members = 25
//   learner = enet                       # or svm
//   setups = baseline, fpca, ensemble
//   failure_budget = 0
//   fpca.grid_size = 390
//   fpca.horizon_minutes = 390
//   fpca.variance_threshold = 0.999
//   enet.lambda_min = 1e-8
//   enet.lambda_max = 5
//   enet.lambda_count = 100
//   enet.alphas = 0.2, 0.4, 0.6, 0.8
//   enet.folds = 5
//   enet.max_iters = 100000
//   enet.tol = 1e-7
//   svm.degree = 2
//   svm.c = 0.25
//   svm.tol = 1e-3
//   input.columns = timestamp_ns,bid_price,ask_price,bid_size,ask_size,symbol
//   input.delimiter = ,
//   input.header = false
//   stock.AAA.file = data/aaa.csv
//   stock.BBB.synth.n_events = 400000    # any synth field; see SynthConfig
//
// Relative file paths resolve against `base_dir`. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig config_from_json(const std::string& text);
std::string config_hash(const ExperimentConfig& config);  // 16 hex digits over the canonical JSON

// FNV-1a over the row keys, as 16 hex digits.
std::string row_set_hash(std::span<const RowKey> keys);

struct SetupResult {
    Setup setup = Setup::baseline;
    MetricsReport metrics;
    double fit_seconds = 0.0;
    bool converged = true;
    double lambda = 0.0;  // ENet hyperparameters chosen by the grid search
    double alpha_star = 0.0;
    int voting_members = 0;  // ensemble only
    int failed_members = 0;
    std::string train_hash;  // rows the setup trained on (the repeat's train draw)
    std::string test_hash;
};

struct RepeatResult {
    int stock = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    int fpc_count = 0;
    std::vector<SetupResult> setups;  // in config order

    const SetupResult* find(Setup s) const;
};

struct SignificanceRow {
    std::string symbol;
    Strategy strategy = Strategy::within_window_recovery;
    WilcoxonResult test;
    double median_delta = 0.0;
    double p_adjusted = 1.0;
};

struct StockSummary {
    std::string symbol;
    std::size_t rows = 0;  // labeled rows available to the sampler
    std::array<std::size_t, kNumClasses> class_rows{};
    std::vector<std::string> diagnostics;
    std::optional<ImportanceReport> importance;  // ENet runs only
};

struct BenchmarkReport {
    ExperimentConfig config;
    std::vector<StockSummary> stocks;
    std::vector<RepeatResult> repeats;  // stock-major, repeat-minor
    std::vector<SignificanceRow> significance;
    int failed_repeats = 0;

    bool success() const { return failed_repeats <= config.failure_budget; }
    // Paired F1 deltas of one stock over repeats where both setups succeeded.
    std::vector<double> deltas(int stock, Strategy s) const;
};

struct RunOptions {
    int jobs = 1;
    std::vector<std::string>* log = nullptr;
};

// Runs every (stock, repeat) job: stratified train/test draw shared by all
// setups, FPCA basis fit on the train rows' history, winsorize/standardize
// with train statistics, fit and score each setup. Then paired Wilcoxon tests
// per (stock, strategy) with one FDR adjustment across all of them, and ENet
// selection frequencies over every model trained on baseline features.
BenchmarkReport run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Loads one stock's events: cleaned file quotes or a synthetic stream.
std::vector<QuoteEvent> load_stock(const StockInput& input, const ColumnMapping& mapping,
                                   CleaningReport* report = nullptr);

// Writes metrics.csv, metrics_by_repeat.csv, f1_deltas.csv, significance.csv,
// significance_table.csv, importance.csv, importance_histogram.csv,
// timings.csv, timing_summary.csv, results.json and manifest.json. Everything
// except the two timing tables is a deterministic function of the config.
void emit_reports(const BenchmarkReport& report, const std::filesystem::path& outdir);

std::string report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const std::string& text);
BenchmarkReport load_results(const std::filesystem::path& results_json);

}  // namespace lobbench

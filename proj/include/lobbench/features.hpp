#pragma once

#include "lobbench/core.hpp"
#include "lobbench/windowing.hpp"

#include <Eigen/Core>

#include <array>
#include <compare>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lobbench {

// V1..V22 or the j-th FPC score.
struct FeatureId {
    enum class Kind : std::uint8_t { variable, fpc };

    Kind kind = Kind::variable;
    int number = 1;

    static constexpr FeatureId v(int n) { return {Kind::variable, n}; }
    static constexpr FeatureId fpc(int j) { return {Kind::fpc, j}; }

    std::string name() const;
    static FeatureId parse(std::string_view text);

    auto operator<=>(const FeatureId&) const = default;
};

inline constexpr int kWithinWindowCount = 10;  // V1..V10
inline constexpr int kWindowLevelCount = 12;   // V11..V22

std::vector<FeatureId> within_window_ids();
std::vector<FeatureId> window_level_ids();
std::vector<FeatureId> fpc_ids(int count);

using WithinWindowFeatures = std::array<double, kWithinWindowCount>;

struct WindowLevelFeatures {
    std::array<double, kWindowLevelCount> values{};
    // Fewer than two events in the one-second lookback; V17-V21 are 0.
    bool sparse_lookback = false;
};

// Window-level variables V11-V22 for target window i (1-based, i >= 3), read at
// the record event of window i-1. `windows` must be frame(day_events, k).
WindowLevelFeatures window_level_features(std::span<const EventWindow> windows,
                                          std::span<const QuoteEvent> day_events, std::int64_t i);

// Within-window variables V1-V10 for target window i (i >= 3).
WithinWindowFeatures within_window_features(std::span<const EventWindow> windows, std::int64_t i);

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------
struct RowKey {
    std::int32_t date = 0;
    std::int64_t window_index = 0;

    auto operator<=>(const RowKey&) const = default;
};

// Dense supervised-learning table: one row per labeled window.
struct Dataset {
    std::vector<FeatureId> features;
    Eigen::MatrixXd x;
    std::vector<Label> y;
    std::vector<RowKey> keys;
    // Set by transform(); guards against standardizing twice.
    bool standardized = false;

    Eigen::Index rows() const { return x.rows(); }
    Eigen::Index cols() const { return x.cols(); }

    std::optional<Eigen::Index> column(FeatureId id) const;
    Dataset select_rows(std::span<const Eigen::Index> rows) const;
    // Throws ParameterError when a requested feature is absent.
    Dataset select_columns(std::span<const FeatureId> ids) const;
    // Appends columns (same row order).
    void append_columns(std::span<const FeatureId> ids, const Eigen::MatrixXd& values);
    void validate() const;
};

// V1..V22 rows for every window i >= 3 of every day in `events`. Windows are
// framed per day and never span a day boundary.
Dataset featurize(std::span<const QuoteEvent> events, const LabelingParams& params);

// Header "date,window,label,V1,..." then one row per sample; values printed
// with 12 significant digits.
void write_feature_csv(std::ostream& out, const Dataset& data);
std::string format_sig12(double v);

}  // namespace lobbench

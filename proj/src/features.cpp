#include "lobbench/features.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace lobbench {

std::string FeatureId::name() const {
    return (kind == Kind::variable ? "V" : "FPC") + std::to_string(number);
}

FeatureId FeatureId::parse(std::string_view text) {
    auto number_after = [&](std::size_t prefix) {
        int n = 0;
        auto s = text.substr(prefix);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
        if (ec != std::errc() || ptr != s.data() + s.size() || n < 1)
            throw ParameterError("bad feature id '" + std::string(text) + "'");
        return n;
    };
    if (text.starts_with("FPC")) return fpc(number_after(3));
    if (text.starts_with("V")) {
        const int n = number_after(1);
        if (n > kWithinWindowCount + kWindowLevelCount)
            throw ParameterError("bad feature id '" + std::string(text) + "'");
        return v(n);
    }
    throw ParameterError("bad feature id '" + std::string(text) + "'");
}

std::vector<FeatureId> within_window_ids() {
    std::vector<FeatureId> ids;
    for (int n = 1; n <= kWithinWindowCount; ++n) ids.push_back(FeatureId::v(n));
    return ids;
}

std::vector<FeatureId> window_level_ids() {
    std::vector<FeatureId> ids;
    for (int n = kWithinWindowCount + 1; n <= kWithinWindowCount + kWindowLevelCount; ++n)
        ids.push_back(FeatureId::v(n));
    return ids;
}

std::vector<FeatureId> fpc_ids(int count) {
    std::vector<FeatureId> ids;
    for (int j = 1; j <= count; ++j) ids.push_back(FeatureId::fpc(j));
    return ids;
}

namespace {

void check_target(std::span<const EventWindow> windows, std::int64_t i) {
    if (i < 3 || i > static_cast<std::int64_t>(windows.size()))
        throw ParameterError("features: target window " + std::to_string(i) + " outside [3, " +
                             std::to_string(windows.size()) + "]");
}

}  // namespace

WindowLevelFeatures window_level_features(std::span<const EventWindow> windows,
                                          std::span<const QuoteEvent> day_events, std::int64_t i) {
    check_target(windows, i);
    const auto& record = windows[i - 2].last();
    const auto pos = &record - day_events.data();
    if (pos < 0 || pos >= static_cast<std::ptrdiff_t>(day_events.size()))
        throw ParameterError("window_level_features: windows do not belong to day_events");

    WindowLevelFeatures out;
    auto& v = out.values;
    v[0] = record.ask_price;
    v[1] = record.bid_price;
    v[2] = record.mid_price;
    v[3] = static_cast<double>(record.ask_volume);
    v[4] = static_cast<double>(record.bid_volume);
    v[5] = (record.ask_price - record.bid_price) / record.mid_price;

    // Events with t in (t_record - 1s, t_record], up to and including the record.
    const std::int64_t anchor = record.timestamp_ns;
    std::ptrdiff_t lo = pos;
    while (lo > 0 && day_events[lo - 1].timestamp_ns > anchor - kNsPerSecond) --lo;
    const auto lookback = day_events.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(pos - lo + 1));
    v[11] = static_cast<double>(lookback.size());

    const double n = static_cast<double>(lookback.size());
    double t_mean = 0.0;
    for (const auto& e : lookback) t_mean += static_cast<double>(e.timestamp_ns - anchor);
    t_mean /= n;
    double sxx = 0.0;
    for (const auto& e : lookback) {
        const double dx = static_cast<double>(e.timestamp_ns - anchor) - t_mean;
        sxx += dx * dx;
    }
    if (lookback.size() < 2 || sxx == 0.0) {
        out.sparse_lookback = true;
        for (int f = 6; f <= 10; ++f) v[f] = 0.0;
        return out;
    }

    auto slope = [&](auto value_of) {
        double mean = 0.0;
        for (const auto& e : lookback) mean += value_of(e);
        mean /= n;
        double sxy = 0.0;
        for (const auto& e : lookback)
            sxy += (static_cast<double>(e.timestamp_ns - anchor) - t_mean) * (value_of(e) - mean);
        return sxy / sxx * 1e9;
    };
    v[6] = slope([](const QuoteEvent& e) { return e.ask_price; });
    v[7] = slope([](const QuoteEvent& e) { return e.bid_price; });
    v[8] = slope([](const QuoteEvent& e) { return e.mid_price; });
    v[9] = slope([](const QuoteEvent& e) { return static_cast<double>(e.ask_volume); });
    v[10] = slope([](const QuoteEvent& e) { return static_cast<double>(e.bid_volume); });
    return out;
}

WithinWindowFeatures within_window_features(std::span<const EventWindow> windows, std::int64_t i) {
    check_target(windows, i);
    const auto& prev = windows[i - 2];
    const auto& prev2 = windows[i - 3];
    const double k = static_cast<double>(prev.size());

    WithinWindowFeatures v{};
    v[0] = (prev.last().bid_price - prev.first().bid_price) / prev.first().bid_price;
    v[1] = (prev.last().ask_price - prev.first().ask_price) / prev.first().ask_price;
    v[2] = (prev.last().bid_price - prev.first().ask_price) / prev.first().ask_price;

    double ask_sum = 0.0, bid_sum = 0.0, mid_sum = 0.0, ask_vol = 0.0, bid_vol = 0.0;
    for (const auto& e : prev.events) {
        ask_sum += e.ask_price;
        bid_sum += e.bid_price;
        mid_sum += e.mid_price;
        ask_vol += static_cast<double>(e.ask_volume);
        bid_vol += static_cast<double>(e.bid_volume);
    }
    v[3] = ask_sum / k;
    v[4] = bid_sum / k;
    v[5] = mid_sum / k;
    v[6] = ask_vol;
    v[7] = bid_vol;

    // Population standard deviation over the 2k mids of windows i-2 and i-1.
    double mean = 0.0;
    for (const auto& e : prev2.events) mean += e.mid_price;
    mean += mid_sum;
    const double count = static_cast<double>(prev2.size() + prev.size());
    mean /= count;
    double ss = 0.0;
    for (const auto* w : {&prev2, &prev})
        for (const auto& e : w->events) ss += (e.mid_price - mean) * (e.mid_price - mean);
    v[8] = std::sqrt(ss / count);

    const std::int64_t span_ns = std::max<std::int64_t>(prev.last().timestamp_ns - prev.first().timestamp_ns, 1);
    v[9] = 1.0 / ns_to_seconds(span_ns);
    return v;
}

// ---------------------------------------------------------------------------

std::optional<Eigen::Index> Dataset::column(FeatureId id) const {
    for (std::size_t c = 0; c < features.size(); ++c)
        if (features[c] == id) return static_cast<Eigen::Index>(c);
    return std::nullopt;
}

Dataset Dataset::select_rows(std::span<const Eigen::Index> rows) const {
    Dataset out;
    out.features = features;
    out.standardized = standardized;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    out.y.reserve(rows.size());
    out.keys.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = rows[r];
        if (src < 0 || src >= x.rows()) throw ParameterError("select_rows: row index out of range");
        out.x.row(static_cast<Eigen::Index>(r)) = x.row(src);
        out.y.push_back(y[src]);
        if (!keys.empty()) out.keys.push_back(keys[src]);
    }
    return out;
}

Dataset Dataset::select_columns(std::span<const FeatureId> ids) const {
    Dataset out;
    out.features.assign(ids.begin(), ids.end());
    out.y = y;
    out.keys = keys;
    out.standardized = standardized;
    out.x.resize(x.rows(), static_cast<Eigen::Index>(ids.size()));
    for (std::size_t c = 0; c < ids.size(); ++c) {
        auto src = column(ids[c]);
        if (!src) throw ParameterError("dataset has no feature " + ids[c].name());
        out.x.col(static_cast<Eigen::Index>(c)) = x.col(*src);
    }
    return out;
}

void Dataset::append_columns(std::span<const FeatureId> ids, const Eigen::MatrixXd& values) {
    if (values.rows() != x.rows() || values.cols() != static_cast<Eigen::Index>(ids.size()))
        throw ParameterError("append_columns: shape mismatch");
    Eigen::MatrixXd grown(x.rows(), x.cols() + values.cols());
    grown << x, values;
    x = std::move(grown);
    features.insert(features.end(), ids.begin(), ids.end());
}

void Dataset::validate() const {
    if (static_cast<Eigen::Index>(features.size()) != x.cols())
        throw ParameterError("dataset: feature list does not match column count");
    if (static_cast<Eigen::Index>(y.size()) != x.rows()) throw ParameterError("dataset: label count mismatch");
    if (!keys.empty() && static_cast<Eigen::Index>(keys.size()) != x.rows())
        throw ParameterError("dataset: key count mismatch");
    if (!x.allFinite()) throw DataError("dataset contains non-finite feature values");
}

Dataset featurize(std::span<const QuoteEvent> events, const LabelingParams& params) {
    params.validate();
    constexpr int kWidth = kWithinWindowCount + kWindowLevelCount;

    std::vector<std::array<double, kWidth>> rows;
    Dataset out;
    for (auto day : split_days(events)) {
        const auto windows = frame(day, params.k);
        for (std::int64_t i = 3; i <= static_cast<std::int64_t>(windows.size()); ++i) {
            std::array<double, kWidth> row;
            const auto within = within_window_features(windows, i);
            const auto level = window_level_features(windows, day, i);
            std::copy(within.begin(), within.end(), row.begin());
            std::copy(level.values.begin(), level.values.end(), row.begin() + kWithinWindowCount);
            rows.push_back(row);
            out.y.push_back(label(windows[i - 1], windows[i - 2], params));
            out.keys.push_back({day.front().date, i});
        }
    }
    out.features = within_window_ids();
    for (auto id : window_level_ids()) out.features.push_back(id);
    out.x.resize(static_cast<Eigen::Index>(rows.size()), kWidth);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c = 0; c < kWidth; ++c) out.x(static_cast<Eigen::Index>(r), c) = rows[r][c];
    return out;
}

std::string format_sig12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_feature_csv(std::ostream& out, const Dataset& data) {
    out << "date,window,label";
    for (auto id : data.features) out << ',' << id.name();
    out << '\n';
    for (Eigen::Index r = 0; r < data.rows(); ++r) {
        const auto key = data.keys.empty() ? RowKey{} : data.keys[r];
        out << key.date << ',' << key.window_index << ',' << to_string(data.y[r]);
        for (Eigen::Index c = 0; c < data.cols(); ++c) out << ',' << format_sig12(data.x(r, c));
        out << '\n';
    }
}

}  // namespace lobbench

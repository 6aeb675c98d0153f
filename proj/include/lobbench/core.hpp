#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lobbench {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad argument, configuration or shape mismatch.
class ParameterError : public Error {
public:
    using Error::Error;
};

// Input data that cannot be processed (out of order, degenerate, non-finite).
class DataError : public Error {
public:
    using Error::Error;
};

// ---------------------------------------------------------------------------
// Time
// ---------------------------------------------------------------------------
inline constexpr std::int64_t kNsPerSecond = 1'000'000'000LL;
inline constexpr std::int64_t kNsPerMinute = 60 * kNsPerSecond;
inline constexpr std::int64_t kNsPerHour = 60 * kNsPerMinute;
inline constexpr std::int64_t kMarketOpenNs = 9 * kNsPerHour + 30 * kNsPerMinute;
inline constexpr std::int64_t kMarketCloseNs = 16 * kNsPerHour;
inline constexpr std::int64_t kSessionLengthNs = kMarketCloseNs - kMarketOpenNs;

inline double ns_to_seconds(std::int64_t ns) { return static_cast<double>(ns) / 1e9; }

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------
// Fixed class order Downwards < Stationary < Upwards; used for tie-breaks and
// as the row/column order of every per-class table.
enum class Label : std::uint8_t { Downwards = 0, Stationary = 1, Upwards = 2 };

inline constexpr int kNumClasses = 3;
inline constexpr std::array<Label, kNumClasses> kAllLabels = {Label::Downwards, Label::Stationary,
                                                              Label::Upwards};

inline constexpr int class_index(Label l) { return static_cast<int>(l); }
inline constexpr Label label_from_index(int i) { return static_cast<Label>(i); }

inline std::string_view to_string(Label l) {
    switch (l) {
        case Label::Downwards: return "Downwards";
        case Label::Stationary: return "Stationary";
        case Label::Upwards: return "Upwards";
    }
    return "?";
}

Label parse_label(std::string_view s);

// ---------------------------------------------------------------------------
// Quotes
// ---------------------------------------------------------------------------
// One cleaned depth-1 book update. `date` is an opaque, nondecreasing trading
// day key (YYYYMMDD or an ordinal); timestamps are nanoseconds since midnight.
struct QuoteEvent {
    std::int32_t date = 0;
    std::int64_t timestamp_ns = 0;
    double bid_price = 0.0;
    double ask_price = 0.0;
    std::int64_t bid_volume = 0;
    std::int64_t ask_volume = 0;
    double mid_price = 0.0;

    static QuoteEvent make(std::int32_t date, std::int64_t t, double bid, double ask,
                           std::int64_t bid_volume, std::int64_t ask_volume) {
        return {date, t, bid, ask, bid_volume, ask_volume, (bid + ask) / 2.0};
    }
};

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent child seed; used for repeats, members and folds.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

}  // namespace lobbench

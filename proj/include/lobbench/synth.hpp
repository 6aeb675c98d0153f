#pragma once

#include "lobbench/core.hpp"

#include <cmath>
#include <vector>

namespace lobbench {

// Synthetic depth-1 quote stream.
//
// The mid-price is a tick-quantized random walk: each event moves bid and ask
// together by one tick with probability `move_prob`, otherwise only volumes
// change. Spreads take values spread_ticks_min + 2m and widen or narrow
// symmetrically around the mid, so spread changes never move the mid.
//
// Planted signal: inside window w of a day, the up-probability of a move is
// 0.5 + 0.5 * trend_signal_strength * sign(slope of window w-1), where the
// slope is last mid minus first mid of that window. Windows restart each day
// and have `window_length` events, matching frame().
struct SynthConfig {
    std::int64_t n_events = 100'000;
    std::uint64_t seed = 1;
    double base_price = 100.0;
    double tick_size = 0.01;
    int spread_ticks_min = 1;
    int spread_ticks_max = 5;
    double spread_change_prob = 0.05;
    double move_prob = 0.3;
    double drift_per_event = 0.0;         // expected mid change per event, price units
    double trend_signal_strength = 0.0;   // in [0, 1]
    double arrival_rate = 2.0;            // events per second
    int window_length = 5;
    double volume_log_mean = 6.2;         // log-normal volumes, ~500 shares
    double volume_log_sd = 0.6;
    std::int32_t first_date = 1;

    void validate() const;  // throws ParameterError
};

std::vector<QuoteEvent> generate(const SynthConfig& config);

}  // namespace lobbench

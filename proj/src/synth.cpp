#include "lobbench/synth.hpp"

#include <algorithm>
#include <random>

namespace lobbench {

void SynthConfig::validate() const {
    if (n_events <= 0) throw ParameterError("synth: n_events must be positive");
    if (!(base_price > 0.0)) throw ParameterError("synth: base_price must be positive");
    if (!(tick_size > 0.0)) throw ParameterError("synth: tick_size must be positive");
    if (spread_ticks_min < 1 || spread_ticks_max < spread_ticks_min)
        throw ParameterError("synth: need 1 <= spread_ticks_min <= spread_ticks_max");
    if (!(trend_signal_strength >= 0.0 && trend_signal_strength <= 1.0))
        throw ParameterError("synth: trend_signal_strength must lie in [0, 1]");
    if (!(move_prob > 0.0 && move_prob <= 1.0)) throw ParameterError("synth: move_prob must lie in (0, 1]");
    if (!(spread_change_prob >= 0.0 && spread_change_prob <= 1.0))
        throw ParameterError("synth: spread_change_prob must lie in [0, 1]");
    if (!(arrival_rate > 0.0)) throw ParameterError("synth: arrival_rate must be positive");
    if (window_length < 2) throw ParameterError("synth: window_length must be >= 2");
    if (!(volume_log_sd >= 0.0)) throw ParameterError("synth: volume_log_sd must be >= 0");
    // Keeps every quote inside the cleaning bounds (spread <= 25% of mid).
    if (base_price / tick_size < 8.0 * spread_ticks_max + 2)
        throw ParameterError("synth: base_price too small for the tick size and spread range");
}

std::vector<QuoteEvent> generate(const SynthConfig& cfg) {
    cfg.validate();

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::exponential_distribution<double> gap_seconds(cfg.arrival_rate);
    std::normal_distribution<double> log_volume(cfg.volume_log_mean, cfg.volume_log_sd);

    const std::int64_t floor_ticks = 8LL * cfg.spread_ticks_max;
    int spread = cfg.spread_ticks_min;
    std::int64_t bid_ticks =
        std::max<std::int64_t>(floor_ticks, std::llround(cfg.base_price / cfg.tick_size - spread / 2.0));

    const double drift_bias = cfg.drift_per_event / (2.0 * cfg.move_prob * cfg.tick_size);

    auto draw_volume = [&] { return std::max<std::int64_t>(1, std::llround(std::exp(log_volume(rng)))); };

    std::vector<QuoteEvent> events;
    events.reserve(static_cast<std::size_t>(cfg.n_events));

    std::int32_t date = cfg.first_date;
    std::int64_t t = kMarketOpenNs;
    std::int64_t in_day = 0;      // events emitted so far today
    std::int64_t window_first = 0;  // doubled mid (half-tick units) of current window's first event
    int prev_slope = 0;

    for (std::int64_t e = 0; e < cfg.n_events; ++e) {
        const std::int64_t gap = std::max<std::int64_t>(1, std::llround(gap_seconds(rng) * 1e9));
        t += gap;
        if (t >= kMarketCloseNs) {
            ++date;
            t = kMarketOpenNs + gap % kSessionLengthNs;
            in_day = 0;
        }

        const int pos = static_cast<int>(in_day % cfg.window_length);
        if (pos == 0) {
            if (in_day == 0) {
                prev_slope = 0;
            } else {
                const std::int64_t last = 2 * bid_ticks + spread;
                prev_slope = (last > window_first) - (last < window_first);
            }
        }

        if (unit(rng) < cfg.move_prob) {
            double p_up = 0.5 + 0.5 * cfg.trend_signal_strength * prev_slope + drift_bias;
            p_up = std::clamp(p_up, 0.0, 1.0);
            const bool up = unit(rng) < p_up || bid_ticks - 1 < floor_ticks;
            bid_ticks += up ? 1 : -1;
        } else if (unit(rng) < cfg.spread_change_prob) {
            const bool can_widen = spread + 2 <= cfg.spread_ticks_max && bid_ticks - 1 >= floor_ticks;
            const bool can_narrow = spread - 2 >= cfg.spread_ticks_min;
            const bool widen = can_widen && (!can_narrow || unit(rng) < 0.5);
            if (widen) {
                bid_ticks -= 1;
                spread += 2;
            } else if (can_narrow) {
                bid_ticks += 1;
                spread -= 2;
            }
        }

        if (pos == 0) window_first = 2 * bid_ticks + spread;

        const double bid = static_cast<double>(bid_ticks) * cfg.tick_size;
        const double ask = static_cast<double>(bid_ticks + spread) * cfg.tick_size;
        const std::int64_t bv = draw_volume();
        const std::int64_t av = draw_volume();
        events.push_back(QuoteEvent::make(date, t, bid, ask, bv, av));
        ++in_day;
    }
    return events;
}

}  // namespace lobbench

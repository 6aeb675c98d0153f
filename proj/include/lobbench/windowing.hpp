#pragma once

#include "lobbench/core.hpp"

#include <span>
#include <vector>

namespace lobbench {

// k consecutive events of one trading day. `index` is the 1-based window
// number i within the day; the view points into the framed event sequence.
struct EventWindow {
    std::int64_t index = 0;
    std::span<const QuoteEvent> events;

    const QuoteEvent& first() const { return events.front(); }
    const QuoteEvent& last() const { return events.back(); }
    int size() const { return static_cast<int>(events.size()); }
};

struct LabelingParams {
    double alpha = 1e-5;
    int k = 5;

    void validate() const;
};

// Non-overlapping k-event windows of one day's chronological events; the
// trailing remainder of fewer than k events is dropped.
std::vector<EventWindow> frame(std::span<const QuoteEvent> events, int k);

// Contiguous runs of equal `date`, in input order.
std::vector<std::span<const QuoteEvent>> split_days(std::span<const QuoteEvent> events);

// Mean mid of `current` divided by the last mid of `previous`.
double movement_ratio(const EventWindow& current, const EventWindow& previous);

// Upwards if ratio > 1 + alpha, Downwards if ratio < 1 - alpha, else Stationary.
Label label(const EventWindow& current, const EventWindow& previous, const LabelingParams& params);

}  // namespace lobbench

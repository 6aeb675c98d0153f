#include "lobbench/windowing.hpp"

#include <string>

namespace lobbench {

Label parse_label(std::string_view s) {
    for (auto l : kAllLabels)
        if (to_string(l) == s) return l;
    if (s == "D" || s == "0") return Label::Downwards;
    if (s == "S" || s == "1") return Label::Stationary;
    if (s == "U" || s == "2") return Label::Upwards;
    throw ParameterError("unknown label '" + std::string(s) + "'");
}

void LabelingParams::validate() const {
    if (!(alpha >= 0.0)) throw ParameterError("labeling: alpha must be >= 0");
    if (k < 2) throw ParameterError("labeling: k must be >= 2");
}

std::vector<EventWindow> frame(std::span<const QuoteEvent> events, int k) {
    if (k < 2) throw ParameterError("frame: window length k must be >= 2, got " + std::to_string(k));
    const std::size_t count = events.size() / static_cast<std::size_t>(k);
    std::vector<EventWindow> windows;
    windows.reserve(count);
    for (std::size_t w = 0; w < count; ++w)
        windows.push_back({static_cast<std::int64_t>(w + 1), events.subspan(w * k, static_cast<std::size_t>(k))});
    return windows;
}

std::vector<std::span<const QuoteEvent>> split_days(std::span<const QuoteEvent> events) {
    std::vector<std::span<const QuoteEvent>> days;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= events.size(); ++i) {
        if (i == events.size() || events[i].date != events[start].date) {
            if (i > start) days.push_back(events.subspan(start, i - start));
            start = i;
        }
    }
    return days;
}

double movement_ratio(const EventWindow& current, const EventWindow& previous) {
    const double anchor = previous.last().mid_price;
    if (anchor == 0.0) throw DataError("label: previous window ends at a zero mid-price");
    double sum = 0.0;
    for (const auto& e : current.events) sum += e.mid_price;
    return (sum / static_cast<double>(current.size())) / anchor;
}

Label label(const EventWindow& current, const EventWindow& previous, const LabelingParams& params) {
    if (current.size() != params.k || previous.size() != params.k)
        throw ParameterError("label: both windows must hold exactly k events");
    const double r = movement_ratio(current, previous);
    if (r > 1.0 + params.alpha) return Label::Upwards;
    if (r < 1.0 - params.alpha) return Label::Downwards;
    return Label::Stationary;
}

}  // namespace lobbench

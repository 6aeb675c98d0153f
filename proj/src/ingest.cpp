#include "lobbench/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace lobbench {

namespace {

constexpr std::array<std::pair<Column, std::string_view>, 7> kColumnNames = {{
    {Column::timestamp_ns, "timestamp_ns"},
    {Column::bid_price, "bid_price"},
    {Column::ask_price, "ask_price"},
    {Column::bid_size, "bid_size"},
    {Column::ask_size, "ask_size"},
    {Column::symbol, "symbol"},
    {Column::date, "date"},
}};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    s = trim(s);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc() && ptr == end;
}

// Fills at most fields.size() views; returns the field count seen, which may
// exceed fields.size() for an over-wide line.
std::size_t split(std::string_view line, char delim, std::span<std::string_view> fields) {
    std::size_t n = 0;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(delim, start);
        auto piece = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        if (n < fields.size()) fields[n] = piece;
        ++n;
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return n;
}

void require_columns(const std::vector<Column>& cols) {
    for (auto needed : {Column::timestamp_ns, Column::bid_price, Column::ask_price, Column::bid_size,
                        Column::ask_size}) {
        if (std::find(cols.begin(), cols.end(), needed) == cols.end())
            throw ParameterError("column mapping lacks required column '" + std::string(column_name(needed)) +
                                 "'");
    }
}

}  // namespace

std::string_view column_name(Column c) {
    for (auto& [col, name] : kColumnNames)
        if (col == c) return name;
    return "ignore";
}

std::optional<Column> parse_column_name(std::string_view name) {
    name = trim(name);
    for (auto& [col, n] : kColumnNames)
        if (n == name) return col;
    if (name == "ignore" || name.empty()) return Column::ignore;
    return std::nullopt;
}

ColumnMapping ColumnMapping::from_names(std::string_view names, char delimiter, bool header) {
    ColumnMapping m;
    m.delimiter = delimiter;
    m.header = header;
    m.columns.clear();
    std::size_t start = 0;
    while (start <= names.size()) {
        auto pos = names.find(',', start);
        auto piece = names.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
        auto col = parse_column_name(piece);
        if (!col) throw ParameterError("unknown column name '" + std::string(trim(piece)) + "'");
        m.columns.push_back(*col);
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    require_columns(m.columns);
    return m;
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    text = trim(text);
    if (text.size() < 14 || text.size() > 15) return std::nullopt;
    std::int64_t raw = 0;
    for (char c : text) {
        if (c < '0' || c > '9') return std::nullopt;
        raw = raw * 10 + (c - '0');
    }
    const std::int64_t frac = raw % kNsPerSecond;
    const std::int64_t hhmmss = raw / kNsPerSecond;
    const std::int64_t ss = hhmmss % 100;
    const std::int64_t mm = (hhmmss / 100) % 100;
    const std::int64_t hh = hhmmss / 10000;
    if (ss >= 60 || mm >= 60 || hh >= 24) return std::nullopt;
    return hh * kNsPerHour + mm * kNsPerMinute + ss * kNsPerSecond + frac;
}

std::string format_timestamp(std::int64_t ns) {
    const std::int64_t hh = ns / kNsPerHour;
    const std::int64_t mm = (ns / kNsPerMinute) % 60;
    const std::int64_t ss = (ns / kNsPerSecond) % 60;
    const std::int64_t frac = ns % kNsPerSecond;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%02lld%02lld%02lld%09lld", static_cast<long long>(hh),
                  static_cast<long long>(mm), static_cast<long long>(ss), static_cast<long long>(frac));
    return buf;
}

ParseResult parse_quote_text(std::string_view text, const ColumnMapping& mapping) {
    ParseResult result;
    result.records.reserve(text.size() / 40);

    std::vector<Column> columns = mapping.columns;
    bool expect_header = mapping.header;
    if (!expect_header) require_columns(columns);

    std::array<std::string_view, 32> fields;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;

        const std::size_t n = split(line, mapping.delimiter, fields);
        if (expect_header) {
            expect_header = false;
            columns.clear();
            for (std::size_t f = 0; f < std::min(n, fields.size()); ++f) {
                auto col = parse_column_name(fields[f]);
                columns.push_back(col.value_or(Column::ignore));
            }
            require_columns(columns);
            continue;
        }
        if (n != columns.size()) {
            result.errors.push_back({line_no, "expected " + std::to_string(columns.size()) + " fields, found " +
                                                  std::to_string(n)});
            continue;
        }

        RawQuoteRecord rec;
        std::string_view bad;
        for (std::size_t f = 0; f < n && bad.empty(); ++f) {
            const auto field = fields[f];
            bool ok = true;
            switch (columns[f]) {
                case Column::timestamp_ns: {
                    auto t = parse_timestamp(field);
                    ok = t.has_value();
                    if (ok) rec.timestamp_ns = *t;
                    break;
                }
                case Column::bid_price: ok = parse_number(field, rec.bid_price); break;
                case Column::ask_price: ok = parse_number(field, rec.ask_price); break;
                case Column::bid_size: ok = parse_number(field, rec.bid_size); break;
                case Column::ask_size: ok = parse_number(field, rec.ask_size); break;
                case Column::date: ok = parse_number(field, rec.date); break;
                case Column::symbol: rec.symbol = std::string(trim(field)); break;
                case Column::ignore: break;
            }
            if (!ok) bad = column_name(columns[f]);
        }
        if (!bad.empty()) {
            result.errors.push_back({line_no, "malformed " + std::string(bad) + " field"});
            continue;
        }
        result.records.push_back(std::move(rec));
    }
    return result;
}

ParseResult parse_quote_file(const std::filesystem::path& path, const ColumnMapping& mapping) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read quote file " + path.string());
    std::string text;
    in.seekg(0, std::ios::end);
    text.resize(static_cast<std::size_t>(in.tellg()));
    in.seekg(0);
    in.read(text.data(), static_cast<std::streamsize>(text.size()));
    if (!in) throw DataError("cannot read quote file " + path.string());
    return parse_quote_text(text, mapping);
}

// ---------------------------------------------------------------------------

std::string_view to_string(CleanRule r) {
    switch (r) {
        case CleanRule::out_of_hours: return "out_of_hours";
        case CleanRule::invalid_quote: return "invalid_quote";
        case CleanRule::zero_quantity: return "zero_quantity";
        case CleanRule::price_jump: return "price_jump";
        case CleanRule::wide_spread: return "wide_spread";
    }
    return "?";
}

std::size_t CleaningReport::total_dropped() const {
    std::size_t s = 0;
    for (auto d : dropped) s += d;
    return s;
}

std::string CleaningReport::to_json() const {
    std::ostringstream os;
    os << "{\n  \"total_in\": " << total_in << ",\n  \"total_out\": " << total_out;
    for (int r = 0; r < kNumCleanRules; ++r)
        os << ",\n  \"dropped_" << to_string(static_cast<CleanRule>(r)) << "\": " << dropped[r];
    os << "\n}\n";
    return os.str();
}

std::optional<CleanRule> first_violation(const RawQuoteRecord& r, std::optional<double> previous_mid) {
    if (r.timestamp_ns < kMarketOpenNs || r.timestamp_ns >= kMarketCloseNs) return CleanRule::out_of_hours;
    if (!(r.bid_price > 0.0) || !(r.ask_price > 0.0) || r.bid_size < 0 || r.ask_size < 0 ||
        r.bid_price > r.ask_price)
        return CleanRule::invalid_quote;
    if (r.bid_size == 0 || r.ask_size == 0) return CleanRule::zero_quantity;
    const double mid = (r.bid_price + r.ask_price) / 2.0;
    if (previous_mid && (mid > 1.5 * *previous_mid || mid < 0.5 * *previous_mid)) return CleanRule::price_jump;
    if (r.ask_price - r.bid_price > 0.25 * mid || r.ask_price > 1.5 * r.bid_price) return CleanRule::wide_spread;
    return std::nullopt;
}

CleanResult clean(std::span<const RawQuoteRecord> records) {
    CleanResult out;
    out.report.total_in = records.size();
    out.events.reserve(records.size());
    std::optional<double> prev_mid;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (i > 0) {
            const auto& p = records[i - 1];
            if (r.date < p.date || (r.date == p.date && r.timestamp_ns < p.timestamp_ns))
                throw DataError("quote records out of chronological order at index " + std::to_string(i));
        }
        if (auto rule = first_violation(r, prev_mid)) {
            ++out.report.dropped[static_cast<int>(*rule)];
            continue;
        }
        out.events.push_back(
            QuoteEvent::make(r.date, r.timestamp_ns, r.bid_price, r.ask_price, r.bid_size, r.ask_size));
        prev_mid = out.events.back().mid_price;
    }
    out.report.total_out = out.events.size();
    return out;
}

std::map<std::string, std::vector<RawQuoteRecord>> split_by_symbol(std::vector<RawQuoteRecord> records) {
    std::map<std::string, std::vector<RawQuoteRecord>> out;
    for (auto& r : records) out[r.symbol].push_back(std::move(r));
    return out;
}

std::vector<RawQuoteRecord> to_raw(std::span<const QuoteEvent> events, std::string_view symbol) {
    std::vector<RawQuoteRecord> out;
    out.reserve(events.size());
    for (const auto& e : events)
        out.push_back({e.date, e.timestamp_ns, e.bid_price, e.ask_price, e.bid_volume, e.ask_volume,
                       std::string(symbol)});
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_quotes(std::ostream& out, std::span<const QuoteEvent> events, std::string_view symbol, char delimiter,
                  bool with_date) {
    const char d = delimiter;
    out << "timestamp_ns" << d << "bid_price" << d << "ask_price" << d << "bid_size" << d << "ask_size" << d
        << "symbol";
    if (with_date) out << d << "date";
    out << '\n';
    std::string line;
    for (const auto& e : events) {
        line.clear();
        line += format_timestamp(e.timestamp_ns);
        line += d;
        line += format_double(e.bid_price);
        line += d;
        line += format_double(e.ask_price);
        line += d;
        line += std::to_string(e.bid_volume);
        line += d;
        line += std::to_string(e.ask_volume);
        line += d;
        line += symbol;
        if (with_date) {
            line += d;
            line += std::to_string(e.date);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace lobbench

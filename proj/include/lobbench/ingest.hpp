#pragma once

#include "lobbench/core.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lobbench {

// A quote line as read from disk. Nothing is validated beyond syntax; clean()
// decides what survives.
struct RawQuoteRecord {
    std::int32_t date = 0;
    std::int64_t timestamp_ns = 0;
    double bid_price = 0.0;
    double ask_price = 0.0;
    std::int64_t bid_size = 0;
    std::int64_t ask_size = 0;
    std::string symbol;
};

enum class Column { timestamp_ns, bid_price, ask_price, bid_size, ask_size, symbol, date, ignore };

std::string_view column_name(Column c);
std::optional<Column> parse_column_name(std::string_view name);

// Delimiter and column order are configuration. With `header` set the first
// line names the columns and overrides `columns`.
struct ColumnMapping {
    char delimiter = ',';
    bool header = false;
    std::vector<Column> columns = {Column::timestamp_ns, Column::bid_price, Column::ask_price,
                                   Column::bid_size,     Column::ask_size,  Column::symbol};

    // Parses a comma-separated list of column names, e.g. "timestamp_ns,bid_price,...".
    static ColumnMapping from_names(std::string_view names, char delimiter = ',', bool header = false);
};

struct ParseDiagnostic {
    std::size_t line = 0;  // 1-based
    std::string message;
};

struct ParseResult {
    std::vector<RawQuoteRecord> records;
    std::vector<ParseDiagnostic> errors;
};

// HHMMSSnnnnnnnnn (15 digits; a missing leading zero is tolerated).
std::optional<std::int64_t> parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t ns_since_midnight);

ParseResult parse_quote_text(std::string_view text, const ColumnMapping& mapping);
// Throws DataError when the file cannot be read.
ParseResult parse_quote_file(const std::filesystem::path& path, const ColumnMapping& mapping);

// ---------------------------------------------------------------------------
// Cleaning
// ---------------------------------------------------------------------------
enum class CleanRule {
    out_of_hours,   // (i)   outside 09:30-16:00
    invalid_quote,  // (ii)  negative or zero price, negative size, bid > ask
    zero_quantity,  // (iii) zero size on either side
    price_jump,     // (iv)  mid outside [50%, 150%] of previous surviving mid
    wide_spread,    // (iv)  spread > 25% of mid, or ask > 150% of bid
};
inline constexpr int kNumCleanRules = 5;
std::string_view to_string(CleanRule r);

struct CleaningReport {
    std::array<std::size_t, kNumCleanRules> dropped{};
    std::size_t total_in = 0;
    std::size_t total_out = 0;

    std::size_t dropped_by(CleanRule r) const { return dropped[static_cast<int>(r)]; }
    std::size_t total_dropped() const;
    std::string to_json() const;
};

// First rule (in the fixed order) that rejects `r`, given the previous
// surviving mid-price (nullopt for the first record of the stream).
std::optional<CleanRule> first_violation(const RawQuoteRecord& r, std::optional<double> previous_mid);

struct CleanResult {
    std::vector<QuoteEvent> events;
    CleaningReport report;
};

// Cleans a single-symbol stream. Records must be ordered by (date, timestamp);
// a DataError naming the offending index is thrown otherwise.
CleanResult clean(std::span<const RawQuoteRecord> records);

// Groups records by symbol, preserving file order within each symbol.
std::map<std::string, std::vector<RawQuoteRecord>> split_by_symbol(std::vector<RawQuoteRecord> records);

std::vector<RawQuoteRecord> to_raw(std::span<const QuoteEvent> events, std::string_view symbol);

// Writes events as delimited text: header line, then one quote per line. The
// date column is written when `with_date` is set.
void write_quotes(std::ostream& out, std::span<const QuoteEvent> events, std::string_view symbol,
                  char delimiter = ',', bool with_date = true);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace lobbench

#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace ffdlab {

inline constexpr std::int64_t kMillisPerMinute = 60'000;
inline constexpr std::int64_t kMillisPerDay = 86'400'000;

// One OHLCV record. `timestamp_ms` is the UTC open time of the bar's window.
struct Bar {
    std::int64_t timestamp_ms = 0;
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    double volume = 0.0;

    bool operator==(const Bar&) const = default;
};

struct BarSeries {
    std::string symbol;
    int period_minutes = 1;
    std::vector<Bar> bars;

    std::size_t size() const noexcept { return bars.size(); }
    bool empty() const noexcept { return bars.empty(); }

    std::vector<double> closes() const;
    std::vector<std::int64_t> timestamps() const;

    bool operator==(const BarSeries&) const = default;
};

// Column names used to find the timestamp and OHLCV fields in a CSV header.
struct CsvSchema {
    std::string timestamp = "timestamp";
    std::string open = "open";
    std::string high = "high";
    std::string low = "low";
    std::string close = "close";
    std::string volume = "volume";

    static CsvSchema from_json_file(const std::filesystem::path& path);
};

// Checks the Bar and BarSeries invariants; throws OHLCViolation / NonMonotonicTimestamp.
void validate(const BarSeries& series);

// Parses a header-first CSV. Rows are sorted by timestamp before validation, so
// shuffled input yields the same series as sorted input. Error line numbers
// count data rows from 1 (the header is row 0). Lines starting with '#' are skipped.
BarSeries parse_csv(std::istream& in, const CsvSchema& schema = {}, int period_minutes = 1,
                    std::string symbol = {});
BarSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema = {}, int period_minutes = 1,
                   std::string symbol = {});

void write_csv(std::ostream& out, const BarSeries& series);

// Aggregates into windows of `target_minutes` aligned to midnight UTC. Empty
// windows are omitted.
BarSeries resample(const BarSeries& series, int target_minutes);

// Epoch milliseconds, or ISO-8601 (`YYYY-MM-DD`, optional `T`/space time part,
// optional fractional seconds and `Z`/`+HH:MM` offset).
std::int64_t parse_timestamp(std::string_view text);
std::string format_timestamp(std::int64_t timestamp_ms);

}  // namespace ffdlab

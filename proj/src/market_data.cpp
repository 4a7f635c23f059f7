#include "ffdlab/market_data.hpp"

#include "ffdlab/csv.hpp"
#include "ffdlab/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

namespace ffdlab {

std::vector<double> BarSeries::closes() const {
    std::vector<double> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.close);
    return out;
}

std::vector<std::int64_t> BarSeries::timestamps() const {
    std::vector<std::int64_t> out;
    out.reserve(bars.size());
    for (const auto& b : bars) out.push_back(b.timestamp_ms);
    return out;
}

CsvSchema CsvSchema::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open schema " + path.string());
    const auto j = nlohmann::json::parse(in);
    CsvSchema s;
    s.timestamp = j.value("timestamp", s.timestamp);
    s.open = j.value("open", s.open);
    s.high = j.value("high", s.high);
    s.low = j.value("low", s.low);
    s.close = j.value("close", s.close);
    s.volume = j.value("volume", s.volume);
    return s;
}

namespace {

void check_bar(const Bar& b, std::size_t row) {
    const bool finite = std::isfinite(b.open) && std::isfinite(b.high) && std::isfinite(b.low) &&
                        std::isfinite(b.close) && std::isfinite(b.volume);
    if (!finite) throw Error(ErrorCode::UnparseableRow, "non-finite field", row);
    if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close) || b.low > b.high) {
        throw Error(ErrorCode::OHLCViolation, "low/high do not bracket open/close", row);
    }
    if (b.volume < 0.0) throw Error(ErrorCode::OHLCViolation, "negative volume", row);
}

int parse_fixed(std::string_view s, std::size_t pos, std::size_t len) {
    if (pos + len > s.size()) throw Error(ErrorCode::UnparseableRow, "truncated timestamp");
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw Error(ErrorCode::UnparseableRow, "bad timestamp digit");
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

}  // namespace

void validate(const BarSeries& series) {
    if (series.period_minutes <= 0) throw Error(ErrorCode::InvalidArgument, "period_minutes must be positive");
    const std::int64_t period_ms = series.period_minutes * kMillisPerMinute;
    for (std::size_t i = 0; i < series.bars.size(); ++i) {
        check_bar(series.bars[i], i + 1);
        if (i > 0) {
            const auto gap = series.bars[i].timestamp_ms - series.bars[i - 1].timestamp_ms;
            if (gap <= 0) throw Error(ErrorCode::NonMonotonicTimestamp, "timestamps not strictly increasing", i + 1);
            if (gap < period_ms) throw Error(ErrorCode::NonMonotonicTimestamp, "bars overlap the declared period", i + 1);
        }
    }
}

std::int64_t parse_timestamp(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    if (text.empty()) throw Error(ErrorCode::UnparseableRow, "empty timestamp");

    const bool numeric = std::all_of(text.begin() + (text.front() == '-' ? 1 : 0), text.end(),
                                     [](char c) { return c >= '0' && c <= '9'; });
    if (numeric && text.size() > (text.front() == '-' ? 1u : 0u)) {
        return csv::parse_int(text, 0);
    }

    using namespace std::chrono;
    const int y = parse_fixed(text, 0, 4);
    if (text.size() < 10 || text[4] != '-' || text[7] != '-') throw Error(ErrorCode::UnparseableRow, "bad date");
    const int mo = parse_fixed(text, 5, 2);
    const int dd = parse_fixed(text, 8, 2);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(dd)}};
    if (!ymd.ok()) throw Error(ErrorCode::UnparseableRow, "invalid calendar date");
    std::int64_t ms = sys_days{ymd}.time_since_epoch().count() * kMillisPerDay;

    std::size_t pos = 10;
    if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
        ++pos;
        const int hh = parse_fixed(text, pos, 2);
        if (pos + 5 > text.size() || text[pos + 2] != ':') throw Error(ErrorCode::UnparseableRow, "bad time");
        const int mi = parse_fixed(text, pos + 3, 2);
        pos += 5;
        int ss = 0;
        double frac = 0.0;
        if (pos < text.size() && text[pos] == ':') {
            ss = parse_fixed(text, pos + 1, 2);
            pos += 3;
            if (pos < text.size() && text[pos] == '.') {
                std::size_t end = pos + 1;
                while (end < text.size() && text[end] >= '0' && text[end] <= '9') ++end;
                frac = csv::parse_double(std::string("0") + std::string(text.substr(pos, end - pos)), 0);
                pos = end;
            }
        }
        if (hh > 23 || mi > 59 || ss > 60) throw Error(ErrorCode::UnparseableRow, "time out of range");
        ms += (hh * 3600LL + mi * 60LL + ss) * 1000LL + static_cast<std::int64_t>(std::llround(frac * 1000.0));
    }
    if (pos < text.size()) {
        if (text[pos] == 'Z' && pos + 1 == text.size()) return ms;
        if ((text[pos] == '+' || text[pos] == '-') && pos + 6 == text.size() && text[pos + 3] == ':') {
            const int sign = text[pos] == '+' ? 1 : -1;
            const int oh = parse_fixed(text, pos + 1, 2);
            const int om = parse_fixed(text, pos + 4, 2);
            return ms - sign * (oh * 60LL + om) * kMillisPerMinute;
        }
        throw Error(ErrorCode::UnparseableRow, "trailing characters in timestamp");
    }
    return ms;
}

std::string format_timestamp(std::int64_t timestamp_ms) {
    using namespace std::chrono;
    const auto day_index = static_cast<std::int64_t>(std::floor(static_cast<double>(timestamp_ms) / kMillisPerDay));
    const std::int64_t rem = timestamp_ms - day_index * kMillisPerDay;
    const year_month_day ymd{sys_days{days{day_index}}};
    char buf[64];
    const auto secs = rem / 1000;
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(secs / 3600), static_cast<long long>((secs / 60) % 60),
                  static_cast<long long>(secs % 60), static_cast<long long>(rem % 1000));
    return buf;
}

BarSeries parse_csv(std::istream& in, const CsvSchema& schema, int period_minutes, std::string symbol) {
    if (period_minutes <= 0) throw Error(ErrorCode::InvalidArgument, "period_minutes must be positive");
    const auto table = csv::read(in);
    const auto c_ts = table.require_column(schema.timestamp);
    const auto c_open = table.require_column(schema.open);
    const auto c_high = table.require_column(schema.high);
    const auto c_low = table.require_column(schema.low);
    const auto c_close = table.require_column(schema.close);
    const auto c_volume = table.require_column(schema.volume);
    const std::size_t needed = std::max({c_ts, c_open, c_high, c_low, c_close, c_volume}) + 1;

    struct Row {
        Bar bar;
        std::size_t line;
    };
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        const std::size_t line = i + 1;
        if (f.size() < needed) throw Error(ErrorCode::UnparseableRow, "too few fields", line);
        Bar b;
        try {
            b.timestamp_ms = parse_timestamp(f[c_ts]);
        } catch (const Error& e) {
            throw Error(ErrorCode::UnparseableRow, e.what(), line);
        }
        b.open = csv::parse_double(f[c_open], line);
        b.high = csv::parse_double(f[c_high], line);
        b.low = csv::parse_double(f[c_low], line);
        b.close = csv::parse_double(f[c_close], line);
        b.volume = csv::parse_double(f[c_volume], line);
        check_bar(b, line);
        rows.push_back({b, line});
    }

    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.bar.timestamp_ms < b.bar.timestamp_ms; });

    BarSeries series;
    series.symbol = std::move(symbol);
    series.period_minutes = period_minutes;
    series.bars.reserve(rows.size());
    const std::int64_t period_ms = period_minutes * kMillisPerMinute;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0) {
            const auto gap = rows[i].bar.timestamp_ms - rows[i - 1].bar.timestamp_ms;
            if (gap == 0) throw Error(ErrorCode::NonMonotonicTimestamp, "duplicate timestamp", rows[i].line);
            if (gap < period_ms) throw Error(ErrorCode::NonMonotonicTimestamp, "bars overlap the declared period", rows[i].line);
        }
        series.bars.push_back(rows[i].bar);
    }
    return series;
}

BarSeries load_csv(const std::filesystem::path& path, const CsvSchema& schema, int period_minutes, std::string symbol) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    if (symbol.empty()) symbol = path.stem().string();
    return parse_csv(in, schema, period_minutes, std::move(symbol));
}

void write_csv(std::ostream& out, const BarSeries& series) {
    out << "timestamp,open,high,low,close,volume\n";
    for (const auto& b : series.bars) {
        out << b.timestamp_ms << ',' << csv::format_double(b.open) << ',' << csv::format_double(b.high) << ','
            << csv::format_double(b.low) << ',' << csv::format_double(b.close) << ','
            << csv::format_double(b.volume) << '\n';
    }
}

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

}  // namespace

BarSeries resample(const BarSeries& series, int target_minutes) {
    if (target_minutes <= 0 || series.period_minutes <= 0 || target_minutes % series.period_minutes != 0) {
        throw Error(ErrorCode::IncompatiblePeriod, "target " + std::to_string(target_minutes) +
                                                       " is not a positive multiple of " +
                                                       std::to_string(series.period_minutes));
    }
    BarSeries out;
    out.symbol = series.symbol;
    out.period_minutes = target_minutes;
    if (target_minutes == series.period_minutes) {
        out.bars = series.bars;
        return out;
    }

    const std::int64_t window_ms = target_minutes * kMillisPerMinute;
    auto window_start = [&](std::int64_t ts) {
        const std::int64_t day_start = floor_div(ts, kMillisPerDay) * kMillisPerDay;
        return day_start + floor_div(ts - day_start, window_ms) * window_ms;
    };

    bool open_window = false;
    std::int64_t current = 0;
    Bar acc;
    for (const auto& b : series.bars) {
        const auto w = window_start(b.timestamp_ms);
        if (!open_window || w != current) {
            if (open_window) out.bars.push_back(acc);
            acc = b;
            acc.timestamp_ms = w;
            current = w;
            open_window = true;
            continue;
        }
        acc.high = std::max(acc.high, b.high);
        acc.low = std::min(acc.low, b.low);
        acc.close = b.close;
        acc.volume += b.volume;
    }
    if (open_window) out.bars.push_back(acc);
    return out;
}

}  // namespace ffdlab

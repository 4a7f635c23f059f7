#include "ffdlab/csv.hpp"

#include "ffdlab/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

namespace ffdlab::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
            field = field.substr(1, field.size() - 2);
        }
        fields.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return fields;
}

std::optional<std::size_t> Table::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
    if (auto idx = column(name)) return *idx;
    throw Error(ErrorCode::MissingColumn, "column '" + std::string(name) + "' not found in header");
}

Table read(std::istream& in) {
    Table table;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        const auto trimmed = trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        if (!have_header) {
            table.header = split_line(trimmed);
            have_header = true;
        } else {
            table.rows.push_back(split_line(trimmed));
        }
    }
    if (!have_header) throw Error(ErrorCode::MissingColumn, "CSV has no header row");
    return table;
}

Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return read(in);
}

double parse_double(std::string_view text, std::size_t row) {
    text = trim(text);
    double value = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        if (text == "nan" || text == "NaN") return std::nan("");
        throw Error(ErrorCode::UnparseableRow, "cannot parse number '" + std::string(text) + "'", row);
    }
    return value;
}

long long parse_int(std::string_view text, std::size_t row) {
    text = trim(text);
    long long value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || text.empty()) {
        throw Error(ErrorCode::UnparseableRow, "cannot parse integer '" + std::string(text) + "'", row);
    }
    return value;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

}  // namespace ffdlab::csv

#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ffdlab::csv {

// Splits one CSV record on commas. Surrounding whitespace and a single pair of
// double quotes are stripped from each field; embedded commas are not supported.
std::vector<std::string> split_line(std::string_view line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
    std::size_t require_column(std::string_view name) const;
};

// Reads a header-first CSV; blank lines and '#' comment lines are ignored.
Table read(std::istream& in);
Table read_file(const std::filesystem::path& path);

double parse_double(std::string_view text, std::size_t row);
long long parse_int(std::string_view text, std::size_t row);

// Shortest round-trip decimal representation.
std::string format_double(double value);

}  // namespace ffdlab::csv

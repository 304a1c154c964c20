#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loadpat::csv {

/// Splits one delimited line. Fields are not quoted in any of our formats.
std::vector<std::string_view> split(std::string_view line, char delim);

std::string_view trim(std::string_view s);

/// Reads a header line and returns the column names, or nullopt at EOF.
std::optional<std::vector<std::string>> read_header(std::istream& in, char delim);

/// Index of `name` in `header`, or -1.
int find_column(const std::vector<std::string>& header, std::string_view name);

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

}  // namespace loadpat::csv

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace bison {

// Shortest decimal string that parses back to exactly v.
std::string format_real(double v);

// Splits on any character in delims, dropping empty fields.
std::vector<std::string_view> split_fields(std::string_view line, std::string_view delims);

// Splits on a single delimiter, keeping empty fields. Trailing '\r' is removed.
std::vector<std::string_view> split_csv(std::string_view line, char delim = ',');

std::string_view trim(std::string_view s);

double parse_real(std::string_view s, std::string_view what);
long long parse_integer(std::string_view s, std::string_view what);

std::string read_file(const std::string& path);

} // namespace bison

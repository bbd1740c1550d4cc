#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gsan::text {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double x);

// Strict parses; return false on trailing garbage or empty input.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, long long& out);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// 1-based line number of a byte offset, for JSON error reporting.
std::size_t line_of_offset(std::string_view contents, std::size_t offset);

}  // namespace gsan::text

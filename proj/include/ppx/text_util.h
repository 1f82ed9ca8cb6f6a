#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ppx::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);  // ASCII only; other bytes pass through
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);
std::vector<std::string> split(std::string_view s, char delim);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
size_t count_occurrences(std::string_view haystack, std::string_view needle);
std::string read_file(const std::string& path);

}  // namespace ppx::text

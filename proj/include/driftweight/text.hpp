#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dw::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Strict parse of the whole token; throws IoError on garbage.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

}  // namespace dw::text

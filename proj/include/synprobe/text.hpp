#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace synprobe {

std::vector<std::string_view> split(std::string_view s, char sep);
std::vector<std::string_view> split_ws(std::string_view s);
// Lines without their terminators; a trailing '\r' is dropped.
std::vector<std::string_view> split_lines(std::string_view text);
std::string_view trim(std::string_view s) noexcept;
std::string to_lower(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::int64_t parse_int(std::string_view s, std::string_view where, std::size_t line);
double parse_double(std::string_view s, std::string_view where, std::size_t line);

// Shortest representation that round-trips.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 14695981039346656037ull);

void write_file(const std::string& path, std::string_view contents);

}  // namespace synprobe

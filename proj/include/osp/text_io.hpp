#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace osp {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double x);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);
std::uint64_t parse_hex64(std::string_view text);
std::string hex64(std::uint64_t x);

std::string fixed(double x, int digits);

std::vector<std::string> split_ws(std::string_view line);
std::string_view trim(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes);

std::string read_file(const std::string& path);
/// Writes via a temporary file and rename, so readers never see partial output.
void write_file(const std::string& path, std::string_view contents);

}  // namespace osp

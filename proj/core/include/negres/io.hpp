#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace negres::io {

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Whole-field parse; throws std::invalid_argument on trailing junk.
double parse_double(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);

}  // namespace negres::io

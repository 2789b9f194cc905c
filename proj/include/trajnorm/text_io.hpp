#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace trajnorm {

/// Shortest decimal form that parses back to the same double.
std::string format_shortest(double value);
/// Fixed 17 significant digits (always round-trips).
std::string format_exact(double value);

double parse_real(std::string_view token);
long long parse_integer(std::string_view token);

std::vector<std::string_view> split(std::string_view text, char delimiter);
std::vector<std::string_view> split_whitespace(std::string_view text);
std::string_view trim(std::string_view text);

/// Writes `contents` to a sibling temporary file and renames it over `path`,
/// so readers never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

/// Hex FNV-1a 64 digest, used for config and model fingerprints.
std::string digest_hex(std::string_view bytes);

}  // namespace trajnorm

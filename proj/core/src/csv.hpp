#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace capfactor::detail {

using CsvRow = std::vector<std::string>;

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF. A UTF-8
/// BOM at the start of the file is skipped. Blank lines are ignored.
std::vector<CsvRow> read_csv(const std::filesystem::path& path);
std::vector<CsvRow> parse_csv(std::string_view text);

std::string csv_escape(std::string_view field);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// Strict full-field parse; returns false on trailing garbage.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, int& out);

std::string trim(std::string_view s);

}  // namespace capfactor::detail

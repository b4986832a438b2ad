#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace porcelain::io {

/// Reads a whole file. Throws MissingFile naming the path if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partially written output.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// One parsed CSV record plus the 1-based physical line it started on.
struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// RFC 4180 style reader: comma delimiter, double-quoted fields with "" as an
/// escaped quote, quoted fields may span lines. Accepts LF and CRLF. Blank
/// lines are skipped. Throws FormatError on an unterminated quote.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Quotes a field only when it contains a comma, quote, CR or LF.
std::string csv_escape(std::string_view field);

std::string join_csv(const std::vector<std::string>& fields);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

/// Strict integer / real parsing of a whole trimmed field.
bool parse_int(std::string_view s, long long& out);
bool parse_double(std::string_view s, double& out);

/// Reads a list of non-empty trimmed lines (one id per line style files).
std::vector<std::string> read_lines(const std::filesystem::path& path);

}  // namespace porcelain::io

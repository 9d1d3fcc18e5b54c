#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hatebench {

/// A header row plus data rows read from a delimited text file.
struct DelimitedTable {
  char delimiter = ',';
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

/// Picks the most frequent of ',', ';' and '\t' outside quotes in `line`.
/// Falls back to ',' when none occurs.
char detect_delimiter(std::string_view line);

/// Parses RFC 4180 style text: double-quoted fields may contain the
/// delimiter, doubled quotes and newlines.
DelimitedTable parse_delimited(std::string_view text, char delimiter);

/// Reads, sanitizes and parses a file, auto-detecting the delimiter from
/// the header line. Throws DataError when the file cannot be opened.
DelimitedTable read_delimited_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

/// Quotes a field for CSV output when it needs it.
std::string csv_field(std::string_view value);

}  // namespace hatebench

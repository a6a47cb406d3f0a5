#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cemaint::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180-style reader: quoted fields, doubled quotes, CRLF or LF records.
/// Empty lines are skipped.
std::vector<Row> parse(std::string_view text, char delimiter = ',');

std::string read_file(const std::filesystem::path& path);

/// Quote a field only when it contains the delimiter, a quote or a newline.
std::string escape(std::string_view field, char delimiter = ',');

/// Fixed-point rendering used by every CSV this tool writes.
std::string fixed(double value, int decimals = 6);

/// Strict double parse (whole field must be consumed). Accepts surrounding
/// whitespace.
std::optional<double> to_double(std::string_view field);
std::optional<long long> to_integer(std::string_view field);

/// Index of `name` in a header row, if present.
std::optional<std::size_t> column_index(const std::vector<std::string>& header,
                                        std::string_view name);

}  // namespace cemaint::csv

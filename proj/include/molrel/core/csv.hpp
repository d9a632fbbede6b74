#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace molrel {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;  // 1-based source line where each row starts

  /// Index of `name` in the header; throws DataError listing the header when absent.
  std::size_t column(std::string_view name) const;
};

/// RFC 4180: quoted fields may contain commas, doubled quotes and newlines;
/// LF and CRLF both end a record; blank lines are skipped. Every row must have
/// as many fields as the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace molrel

#include "molrel/core/csv.hpp"

#include <fstream>
#include <sstream>

#include "molrel/core/error.hpp"

namespace molrel {

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  std::string have;
  for (const auto& h : header) have += (have.empty() ? "" : ", ") + h;
  throw DataError("missing column '" + std::string(name) + "' (header: " + have + ")");
}

CsvTable parse_csv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_quoted = false;
  std::size_t quote_open = 0;

  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    const bool blank = record.size() == 1 && record[0].empty() && !field_quoted;
    field_quoted = false;
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw DataError("CSV line " + std::to_string(record_line) + ": expected " +
                          std::to_string(table.header.size()) + " fields, found " + std::to_string(record.size()));
        }
        table.rows.push_back(std::move(record));
        table.row_lines.push_back(record_line);
      }
    }
    record.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw ParseError("CSV: quote inside unquoted field", i);
        in_quotes = true;
        field_quoted = true;
        quote_open = i;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_quoted = false;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        field += c;
        break;
      case '\n':
        end_record();
        record_line = ++line;
        break;
      default:
        field += c;
    }
  }
  if (in_quotes) throw ParseError("CSV: unterminated quoted field", quote_open);
  if (!field.empty() || !record.empty() || field_quoted) end_record();
  if (table.header.empty()) throw DataError("CSV has no header row");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw DataError("error reading " + path.string());
  return parse_csv(buf.str());
}

}  // namespace molrel

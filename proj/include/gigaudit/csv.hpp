#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gigaudit {

struct CsvRow {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
  std::string error;  // non-empty when the record could not be tokenized
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<CsvRow> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

// RFC-4180 reader: quoted fields, doubled quotes, embedded CR/LF, optional
// UTF-8 BOM. Blank lines are skipped. Tokenization problems are recorded on
// the row rather than thrown.
CsvTable parse_csv_text(std::string_view text);
CsvTable read_csv_file(const std::string& path);

std::string csv_escape(std::string_view field);
void append_csv_row(std::string& out, const std::vector<std::string>& fields);

}  // namespace gigaudit

#include "gigaudit/csv.hpp"

#include <fstream>
#include <sstream>

#include "gigaudit/error.hpp"

namespace gigaudit {

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv_text(std::string_view text) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<CsvRow> records;
  std::size_t i = 0;
  std::size_t line = 1;
  const std::size_t n = text.size();

  while (i < n) {
    CsvRow row;
    row.line = line;
    std::string field;
    bool row_done = false;
    bool blank = true;
    while (!row_done) {
      field.clear();
      if (i < n && text[i] == '"') {
        blank = false;
        ++i;
        bool closed = false;
        while (i < n) {
          const char c = text[i];
          if (c == '"') {
            if (i + 1 < n && text[i + 1] == '"') {
              field += '"';
              i += 2;
              continue;
            }
            ++i;
            closed = true;
            break;
          }
          if (c == '\n') ++line;
          field += c;
          ++i;
        }
        if (!closed) {
          row.error = "unterminated quoted field";
          row.fields.push_back(field);
          i = n;
          break;
        }
        // Anything between the closing quote and the delimiter is junk.
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (row.error.empty()) row.error = "characters after closing quote";
          ++i;
        }
      } else {
        while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
          if (text[i] == '"' && row.error.empty()) row.error = "quote inside unquoted field";
          field += text[i];
          ++i;
        }
        if (!field.empty()) blank = false;
      }
      row.fields.push_back(field);
      if (i >= n) {
        row_done = true;
      } else if (text[i] == ',') {
        blank = false;
        ++i;
      } else {
        if (text[i] == '\r') ++i;
        if (i < n && text[i] == '\n') ++i;
        ++line;
        row_done = true;
      }
    }
    if (blank && row.fields.size() == 1 && row.error.empty()) continue;
    records.push_back(std::move(row));
  }

  CsvTable table;
  if (records.empty()) return table;
  table.header = std::move(records.front().fields);
  for (auto& h : table.header) {
    while (!h.empty() && (h.back() == ' ' || h.back() == '\t')) h.pop_back();
    while (!h.empty() && (h.front() == ' ' || h.front() == '\t')) h.erase(h.begin());
  }
  table.rows.assign(std::make_move_iterator(records.begin() + 1), std::make_move_iterator(records.end()));
  return table;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AuditError(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv_text(ss.str());
}

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_csv_row(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_escape(fields[i]);
  }
  out += '\n';
}

}  // namespace gigaudit

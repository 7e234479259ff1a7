#include "csv.hpp"

#include <fstream>

#include "tcboost/error.hpp"

namespace tcboost::csv {

std::vector<Row> read(std::istream& in) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  char ch;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    // A trailing blank line is not a record.
    if (!(row.size() == 1 && row.front().empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(ch)) {
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) throw ValidationError("csv: stray quote in field");
        quoted = true;
        field_started = true;
        break;
      case ',':
        end_field();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(ch);
        end_row();
        break;
      case '\n':
        end_row();
        break;
      default:
        field.push_back(ch);
        field_started = true;
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

std::vector<Row> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  return read(in);
}

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t k = 0; k < row.size(); ++k) {
    if (k) out << ',';
    out << quote(row[k]);
  }
  out << '\n';
}

}  // namespace tcboost::csv

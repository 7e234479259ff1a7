#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace tcboost::csv {

using Row = std::vector<std::string>;

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<Row> read(std::istream& in);
std::vector<Row> read_file(const std::string& path);

std::string quote(const std::string& field);
void write_row(std::ostream& out, const Row& row);

}  // namespace tcboost::csv

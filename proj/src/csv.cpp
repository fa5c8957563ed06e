#include "ocdsp/csv.hpp"

#include <fmt/format.h>

#include <cstdlib>
#include <istream>
#include <ostream>

#include "ocdsp/errors.hpp"

namespace ocdsp::csv {

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

double parse_double(const std::string& field) {
  if (field.empty()) throw ShapeError("csv: empty numeric field");
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) throw ShapeError("csv: malformed number '" + field + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << fields[i];
  }
  os << '\n';
}

Table read(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw ShapeError("csv: missing header");
  t.header = split_line(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != t.header.size()) throw ShapeError("csv: row width differs from header");
    t.rows.push_back(std::move(fields));
  }
  return t;
}

void write(std::ostream& os, const Table& t) {
  write_row(os, t.header);
  for (const auto& r : t.rows) write_row(os, r);
}

}  // namespace ocdsp::csv

#ifndef OCDSP_CSV_HPP
#define OCDSP_CSV_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace ocdsp::csv {

// Dialect: comma separated, '.' decimal point, header row, LF endings,
// floats with 17 significant digits (lossless for binary64).

std::string format_double(double v);

/// Strict parse of a whole field; throws ShapeError on trailing garbage.
double parse_double(const std::string& field);

std::vector<std::string> split_line(const std::string& line);

void write_row(std::ostream& os, const std::vector<std::string>& fields);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table read(std::istream& is);
void write(std::ostream& os, const Table& t);

}  // namespace ocdsp::csv

#endif  // OCDSP_CSV_HPP

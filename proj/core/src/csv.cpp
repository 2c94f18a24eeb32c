#include "cablepaint/csv.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "cablepaint/errors.hpp"

namespace cablepaint {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  cells.push_back(cur);
  return cells;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!have_header && !line.empty() && line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (!have_header) {
      table.header = cells;
      have_header = true;
    } else {
      table.rows.push_back(cells);
    }
  }
  if (!have_header) throw ParseError("empty CSV file: " + path);
  return table;
}

std::string format_double(double v) {
  // %.17g always round-trips; try the shorter %.15g / %.16g first so the
  // files stay readable.
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

double parse_double(const std::string& cell, const std::string& context) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || (end && *end != '\0')) {
    throw ParseError("non-numeric cell '" + cell + "' in " + context);
  }
  return v;
}

}  // namespace cablepaint

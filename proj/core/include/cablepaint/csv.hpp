#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cablepaint {

// Minimal CSV support for the pipeline's column formats. No quoting: none of
// the artifact schemas need it. Empty cells are preserved (mocap gaps).
struct CsvTable {
  std::vector<std::string> comments;  // leading lines starting with '#'
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

std::vector<std::string> split_csv_line(const std::string& line);

// Shortest decimal form that round-trips the double exactly.
std::string format_double(double v);

double parse_double(const std::string& cell, const std::string& context);

}  // namespace cablepaint

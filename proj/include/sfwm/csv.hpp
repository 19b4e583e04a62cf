#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sfwm/spectral.hpp"

namespace sfwm::csv {

// Shortest round-trip decimal representation, independent of the locale.
std::string format(double v);
double parse_double(std::string_view text);

/// Numeric table with mandatory header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  // Column by name; throws DataError when absent.
  std::vector<double> column(std::string_view name) const;
  bool has(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

void write_row(std::ostream& out, const std::vector<double>& row);
void write_header(std::ostream& out, const std::vector<std::string>& names);

/// omega_cm,value[,stderr]; guard samples are skipped unless `include_guard`.
void write_series(std::ostream& out, const SpectralSeries& s, bool include_guard = false);

}  // namespace sfwm::csv

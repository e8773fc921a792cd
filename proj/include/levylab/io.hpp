#pragma once

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "levylab/curve.hpp"
#include "levylab/errors.hpp"
#include "levylab/inference.hpp"
#include "levylab/levy_models.hpp"
#include "levylab/simulate.hpp"

namespace levylab::io {

/// Shortest-safe round-trip representation: 17 significant digits.
inline std::string fmt(double v) { return detail::format_double(v); }

inline void write_increments_csv(std::ostream& os, const IncrementSample& s) {
  os << "k,x\n";
  for (std::size_t k = 0; k < s.size(); ++k)
    os << (k + 1) << ',' << fmt(s.increments[k]) << '\n';
}

/// Reads a `k,x` CSV (header required). The k column is ignored apart from
/// being present.
inline std::vector<double> read_increments_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw config_error("increment file is empty");
  if (line.rfind("k,x", 0) != 0)
    throw config_error("increment file must start with header 'k,x'");
  std::vector<double> xs;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r")
      continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw config_error("line " + std::to_string(lineno) + ": expected 'k,x'");
    std::string value = line.substr(comma + 1);
    if (!value.empty() && value.back() == '\r')
      value.pop_back();
    xs.push_back(detail::parse_double(value, "x on line " + std::to_string(lineno)));
  }
  return xs;
}

inline void write_curve_csv(std::ostream& os, const std::vector<double>& grid,
                            const std::vector<double>& values, const std::string& value_name = "value") {
  os << "t," << value_name << '\n';
  for (std::size_t i = 0; i < grid.size(); ++i)
    os << fmt(grid[i]) << ',' << fmt(values[i]) << '\n';
}

inline void write_band_csv(std::ostream& os, const BandResult& band) {
  os << "t,lower,estimate,upper\n";
  for (std::size_t i = 0; i < band.curve.size(); ++i)
    os << fmt(band.curve.grid[i]) << ',' << fmt(band.lower(i)) << ',' << fmt(band.curve.values[i])
       << ',' << fmt(band.upper(i)) << '\n';
}

/// Writes `text` to `path` in one step, or to stdout when path is empty or "-".
inline void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f)
    throw std::runtime_error("failed writing '" + path + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw config_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

} // namespace levylab::io

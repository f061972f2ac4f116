#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "kscontrol/discretization.hpp"
#include "kscontrol/errors.hpp"

namespace kscontrol::experiment {

/// 17 significant digits: parses back to the same double.
inline std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Header `t,<x_1>,...,<x_J>` followed by one `t_n,<values>` row per field row.
/// `first_level` is the time level of row 0.
inline void write_field_csv(const std::filesystem::path& path, const SpaceTimeField& field, const TimeGrid& tg,
                            const SpatialGrid& sg, std::size_t first_level) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open '" + path.string() + "' for writing");
  out << "t";
  for (std::size_t j = 0; j < sg.cells(); ++j) out << ',' << format_value(sg.center(j));
  out << '\n';
  for (std::size_t r = 0; r < field.rows(); ++r) {
    out << format_value(tg.level(first_level + r));
    for (double x : field.row(r)) out << ',' << format_value(x);
    out << '\n';
  }
  if (!out) throw SolverError("write failed for '" + path.string() + "'");
}

/// Boundary signal with columns t,g_left,g_right; row n-1 is step n at t_n.
inline void write_boundary_csv(const std::filesystem::path& path, const BoundarySignal& g, const TimeGrid& tg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SolverError("cannot open '" + path.string() + "' for writing");
  out << "t,g_left,g_right\n";
  for (std::size_t r = 0; r < g.steps(); ++r)
    out << format_value(tg.level(r + 1)) << ',' << format_value(g.at(r, Side::left)) << ','
        << format_value(g.at(r, Side::right)) << '\n';
  if (!out) throw SolverError("write failed for '" + path.string() + "'");
}

/// Numeric table as read from a CSV file with one header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(ErrorCode::config_parse, "cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    if (t.header.empty()) {
      while (std::getline(ss, cell, ',')) t.header.push_back(cell);
      continue;
    }
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw ValidationError(ErrorCode::config_parse,
                              path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      row.push_back(x);
    }
    if (row.size() != t.header.size())
      throw ValidationError(ErrorCode::config_parse,
                            path.string() + ":" + std::to_string(lineno) + ": expected " +
                                std::to_string(t.header.size()) + " columns");
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw ValidationError(ErrorCode::config_parse, "'" + path.string() + "' is empty");
  return t;
}

/// Values of a field CSV (time column dropped).
inline SpaceTimeField read_field_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() < 2) throw ValidationError(ErrorCode::config_parse, "'" + path.string() + "' has no data columns");
  SpaceTimeField f(t.rows.size(), t.header.size() - 1);
  for (std::size_t r = 0; r < t.rows.size(); ++r)
    for (std::size_t j = 0; j + 1 < t.header.size(); ++j) f(r, j) = t.rows[r][j + 1];
  return f;
}

inline BoundarySignal read_boundary_csv(const std::filesystem::path& path) {
  const CsvTable t = read_csv(path);
  if (t.header.size() != 3)
    throw ValidationError(ErrorCode::config_parse, "'" + path.string() + "' must have columns t,g_left,g_right");
  BoundarySignal g(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    g.at(r, Side::left) = t.rows[r][1];
    g.at(r, Side::right) = t.rows[r][2];
  }
  return g;
}

}  // namespace kscontrol::experiment

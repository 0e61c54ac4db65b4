#pragma once

// Tab-separated result tables with a '#'-prefixed metadata header.
//
//   # key = value
//   n<TAB>approx<TAB>...
//   31<TAB>0.922997<TAB>...
//
// Probabilities are written with 6 fixed decimals; raw mode writes the
// shortest text that reads back to the same double.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scanstat/errors.hpp"
#include "scanstat/pipeline.hpp"

namespace scanstat {

inline constexpr std::string_view kMissing = "NA";

struct Table {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> cells;

  bool has_column(std::string_view name) const {
    return std::find(columns.begin(), columns.end(), name) != columns.end();
  }

  std::size_t column(std::string_view name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw FormatError("table has no column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns.begin());
  }

  /// Cell as a double; empty and NA cells read as NaN.
  double value(std::size_t row, std::string_view name) const;

  const std::string* meta(std::string_view key) const {
    for (const auto& [k, v] : metadata)
      if (k == key) return &v;
    return nullptr;
  }
};

inline std::string shortest(double v) {
  if (std::isnan(v)) return std::string(kMissing);
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

inline std::string format_value(double v, bool raw) {
  if (std::isnan(v)) return std::string(kMissing);
  if (raw) return shortest(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline double parse_value(std::string_view text) {
  if (text.empty() || text == kMissing) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw FormatError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

inline double Table::value(std::size_t row, std::string_view name) const {
  if (row >= cells.size()) throw FormatError("row " + std::to_string(row) + " out of range");
  return parse_value(cells[row][column(name)]);
}

inline void write_table(std::ostream& os, const Table& t) {
  for (const auto& [k, v] : t.metadata) os << "# " << k << " = " << v << '\n';
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "\t" : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.cells) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "\t" : "") << row[c];
    os << '\n';
  }
}

inline std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

inline Table read_table(std::istream& is) {
  Table t;
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::size_t eq = line.find(" = ");
      if (eq == std::string::npos) {
        t.metadata.emplace_back(line.substr(std::min<std::size_t>(2, line.size())), "");
      } else {
        t.metadata.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
      }
      continue;
    }
    auto fields = split_tabs(line);
    if (!header) {
      t.columns = std::move(fields);
      header = true;
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw FormatError("row has " + std::to_string(fields.size()) + " cells, header has " +
                        std::to_string(t.columns.size()));
    }
    t.cells.push_back(std::move(fields));
  }
  if (!header) throw FormatError("table has no header line");
  return t;
}

inline void check_aligned(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw AlignmentError("tables have " + std::to_string(a.size()) + " and " + std::to_string(b.size()) +
                         " thresholds");
  }
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] != b[k]) throw AlignmentError("threshold mismatch at row " + std::to_string(k + 1));
}

struct TableOptions {
  bool raw = false;
  bool brackets = false;  // add bracket_lower / bracket_upper columns
};

/// One row per threshold: n, [sim], approx, e_app, e_sf, e_sapp, e_interp, e_total, valid.
inline Table approx_table(const std::vector<ApproxRow>& rows, const SimulationTable* sim, TableOptions opts = {}) {
  if (sim) {
    std::vector<double> ns;
    for (const auto& r : rows) ns.push_back(r.n);
    check_aligned(ns, sim->thresholds);
  }
  Table t;
  t.columns.push_back("n");
  if (sim) t.columns.push_back("sim");
  for (const char* c : {"approx", "e_app", "e_sf", "e_sapp", "e_interp", "e_total"}) t.columns.push_back(c);
  if (opts.brackets) {
    t.columns.push_back("bracket_lower");
    t.columns.push_back("bracket_upper");
  }
  t.columns.push_back("valid");
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    std::vector<std::string> line{shortest(r.n)};
    if (sim) line.push_back(format_value(sim->cdf[k], opts.raw));
    for (double v : {r.approx, r.e_app, r.e_sf, r.e_sapp, r.e_interp, r.e_total})
      line.push_back(format_value(v, opts.raw));
    if (opts.brackets) {
      line.push_back(format_value(r.bracket_lower, opts.raw));
      line.push_back(format_value(r.bracket_upper, opts.raw));
    }
    line.push_back(r.valid ? "1" : "0");
    t.cells.push_back(std::move(line));
  }
  return t;
}

inline Table simulation_table(const SimulationTable& sim, TableOptions opts = {}) {
  Table t;
  t.columns = {"n", "sim", "half_width"};
  for (std::size_t k = 0; k < sim.thresholds.size(); ++k) {
    t.cells.push_back(
        {shortest(sim.thresholds[k]), format_value(sim.cdf[k], opts.raw), format_value(sim.half_width[k], opts.raw)});
  }
  return t;
}

inline std::vector<double> thresholds_of(const Table& t) {
  std::vector<double> ns;
  for (std::size_t r = 0; r < t.cells.size(); ++r) ns.push_back(t.value(r, "n"));
  return ns;
}

/// Paired series for plotting: n, sim, approx and the approx -/+ E_total band
/// clipped to [0, 1]. The sim column comes from `sim` when given, otherwise
/// from the approximation table's own sim column, otherwise it is empty.
inline Table plotdata_table(const Table& approx, const Table* sim, TableOptions opts = {}) {
  if (sim) check_aligned(thresholds_of(approx), thresholds_of(*sim));
  const bool own_sim = !sim && approx.has_column("sim");
  Table t;
  t.columns = {"n", "sim", "approx", "lower", "upper"};
  for (std::size_t r = 0; r < approx.cells.size(); ++r) {
    const double a = approx.value(r, "approx");
    const double e = approx.value(r, "e_total");
    std::string s;
    if (sim) s = format_value(sim->value(r, "sim"), opts.raw);
    if (own_sim) s = format_value(approx.value(r, "sim"), opts.raw);
    if (s == kMissing) s.clear();
    std::string lo, hi;
    if (!std::isnan(e)) {
      lo = format_value(std::max(0.0, a - e), opts.raw);
      hi = format_value(std::min(1.0, a + e), opts.raw);
    }
    t.cells.push_back({approx.cells[r][approx.column("n")], s, format_value(a, opts.raw), lo, hi});
  }
  return t;
}

}  // namespace scanstat

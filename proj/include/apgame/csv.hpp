#pragma once

// Flat-file emission: CSV tables and gnuplot-style plot-data blocks with a
// JSON metadata sidecar.  Output is deterministic byte-for-byte for a given
// table: numbers are preformatted by the producers via csv_num (17
// significant digits, enough to round-trip a double).

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "apgame/errors.hpp"

#ifndef APGAME_BUILD_REF
#define APGAME_BUILD_REF "unknown"
#endif

namespace apgame {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

namespace detail {

inline std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline bool numeric_cell(const std::string& s) {
  if (s.empty()) return false;
  char* end = nullptr;
  std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline void check_table(const Table& t) {
  if (t.columns.empty() || t.rows.empty()) {
    throw IoError("refusing to emit an empty table");
  }
  for (const auto& row : t.rows) {
    if (row.size() != t.columns.size()) {
      throw IoError("table row width " + std::to_string(row.size()) +
                    " does not match " + std::to_string(t.columns.size()) +
                    " column(s)");
    }
  }
}

}  // namespace detail

inline void write_csv(std::ostream& os, const Table& t) {
  detail::check_table(t);
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (c) os << ',';
    os << detail::csv_cell(t.columns[c]);
  }
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      os << detail::csv_cell(row[c]);
    }
    os << '\n';
  }
}

inline void emit_csv(const Table& t, const std::string& path) {
  detail::check_table(t);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_csv(os, t);
  if (!os) throw IoError("write to '" + path + "' failed");
}

struct PlotdataOptions {
  std::string x_col;      // default: first column
  std::string group_col;  // one block per distinct value, in row order
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<std::string, std::string>> params;  // sweep settings
};

// Space-separated numeric blocks (blank-line separated when grouped), with a
// comment header naming the series.  Non-numeric columns are left to the CSV
// twin; the metadata sidecar lists everything.
inline void write_plotdata(std::ostream& os, const Table& t,
                           const PlotdataOptions& opts = {}) {
  detail::check_table(t);
  const std::string x_col = opts.x_col.empty() ? t.columns.front() : opts.x_col;
  int x_idx = -1, group_idx = -1;
  std::vector<int> series;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (t.columns[c] == x_col) {
      x_idx = static_cast<int>(c);
    } else if (!opts.group_col.empty() && t.columns[c] == opts.group_col) {
      group_idx = static_cast<int>(c);
    } else if (detail::numeric_cell(t.rows.front()[c])) {
      series.push_back(static_cast<int>(c));
    }
  }
  if (x_idx < 0) throw IoError("plotdata x column '" + x_col + "' not found");
  if (!opts.group_col.empty() && group_idx < 0) {
    throw IoError("plotdata group column '" + opts.group_col + "' not found");
  }

  os << "# x=" << t.columns[x_idx];
  for (int c : series) os << ' ' << t.columns[c];
  os << '\n';
  std::string current_group;
  bool first_block = true;
  for (const auto& row : t.rows) {
    if (group_idx >= 0 && (first_block || row[group_idx] != current_group)) {
      if (!first_block) os << '\n';
      current_group = row[group_idx];
      os << "# " << t.columns[group_idx] << '=' << current_group << '\n';
      first_block = false;
    }
    os << row[x_idx];
    for (int c : series) os << ' ' << row[c];
    os << '\n';
  }
}

// Plot-data file plus `<path>.meta.json` sidecar recording axis labels,
// sweep parameters, column names and the build reference.
inline void emit_plotdata(const Table& t, const std::string& path,
                          const PlotdataOptions& opts = {}) {
  detail::check_table(t);
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    write_plotdata(os, t, opts);
    if (!os) throw IoError("write to '" + path + "' failed");
  }
  nlohmann::json meta;
  meta["title"] = opts.title;
  meta["x"] = opts.x_col.empty() ? t.columns.front() : opts.x_col;
  meta["x_label"] = opts.x_label;
  meta["y_label"] = opts.y_label;
  meta["group"] = opts.group_col;
  meta["columns"] = t.columns;
  meta["rows"] = t.rows.size();
  meta["build"] = APGAME_BUILD_REF;
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : opts.params) params[k] = v;
  meta["params"] = params;
  const std::string meta_path = path + ".meta.json";
  std::ofstream os(meta_path, std::ios::binary);
  if (!os) throw IoError("cannot open '" + meta_path + "' for writing");
  os << meta.dump(2) << '\n';
  if (!os) throw IoError("write to '" + meta_path + "' failed");
}

}  // namespace apgame

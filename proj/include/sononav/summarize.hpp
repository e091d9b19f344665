#pragma once

// Grouped mean/SD summaries over CSV tables of trial results, e.g. alignment
// time per (modality, level), with optional paired-difference columns and an
// exclusion flag column.

#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sononav/error.hpp"
#include "sononav/scenario.hpp"
#include "sononav/stats.hpp"

namespace sononav {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return i;
    }
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quote");
  fields.push_back(std::move(field));
  return fields;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::optional<double> parse_number(const std::string& s) {
  if (s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) return std::nullopt;
    return v;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

inline bool truthy(const std::string& s) { return s == "1" || s == "true" || s == "TRUE" || s == "yes" || s == "y"; }

}  // namespace detail

inline Table parse_csv(std::istream& in) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::vector<std::string> fields;
    try {
      fields = detail::split_csv_line(line);
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (t.columns.empty()) {
      t.columns = std::move(fields);
      continue;
    }
    if (fields.size() != t.columns.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(t.columns.size()) + " fields, got " +
                                             std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.columns.empty()) throw Error(ErrorCode::EmptyInput, "CSV has no header");
  return t;
}

inline Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  return parse_csv(in);
}

inline std::string to_csv(const Table& t) {
  std::ostringstream out;
  auto write_row = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_escape(row[i]);
    out << '\n';
  };
  write_row(t.columns);
  for (const auto& r : t.rows) write_row(r);
  return out.str();
}

/// One row per (group label, target) with the trial metrics, for downstream summaries.
inline Table metrics_table(std::span<const TrialMetrics> rows, std::span<const std::string> group_labels) {
  if (rows.size() != group_labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "one group label is needed per metrics row");
  }
  Table t;
  t.columns = {"label", "target", "target_label", "alignment_time_s", "d_mm",   "theta_deg",
               "e_x_mm", "e_y_mm", "e_phi_deg",    "e_delta_deg",      "aborted"};
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(12) << v;
    return s.str();
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& m = rows[i];
    const auto& e = m.final_error;
    t.rows.push_back({group_labels[i], std::to_string(m.target_id), m.target_label,
                      m.alignment_time_s ? num(*m.alignment_time_s) : "NA", num(e.d), num(e.theta), num(e.e_x),
                      num(e.e_y), num(e.e_phi), num(e.e_delta), m.drill_start_s ? "0" : "1"});
  }
  return t;
}

struct SummarizeOptions {
  std::vector<std::string> group_by;
  std::vector<std::string> values;
  // Each pair (a, b) adds a value column "a-b" computed per row.
  std::vector<std::pair<std::string, std::string>> differences;
  std::string exclude_column;  // rows with a truthy value here are skipped
};

struct SummaryRow {
  std::vector<std::string> key;
  std::vector<stats::MeanSd> values;
};

struct Summary {
  std::vector<std::string> group_by;
  std::vector<std::string> value_columns;
  std::vector<SummaryRow> rows;

  std::string to_csv() const {
    std::ostringstream out;
    out << std::setprecision(10);
    bool first = true;
    for (const auto& g : group_by) {
      out << (first ? "" : ",") << detail::csv_escape(g);
      first = false;
    }
    for (const auto& v : value_columns) {
      out << (first ? "" : ",") << detail::csv_escape(v) << "_n," << detail::csv_escape(v) << "_mean,"
          << detail::csv_escape(v) << "_sd";
      first = false;
    }
    out << '\n';
    for (const auto& r : rows) {
      first = true;
      for (const auto& k : r.key) {
        out << (first ? "" : ",") << detail::csv_escape(k);
        first = false;
      }
      for (const auto& s : r.values) {
        out << (first ? "" : ",") << s.n << ',' << s.mean << ',' << s.sd;
        first = false;
      }
      out << '\n';
    }
    return out.str();
  }

  std::string to_text() const {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.key.size(); ++i) out << (i ? " / " : "") << r.key[i];
      out << '\n';
      for (std::size_t i = 0; i < value_columns.size(); ++i) {
        out << "  " << value_columns[i] << ": " << r.values[i].mean << " +/- " << r.values[i].sd << " (n="
            << r.values[i].n << ")\n";
      }
    }
    return out.str();
  }
};

/// Groups are emitted in order of first appearance. Non-numeric or NA cells are
/// skipped per value column.
inline Summary summarize(const Table& table, const SummarizeOptions& opts) {
  Summary out;
  out.group_by = opts.group_by;
  std::vector<std::size_t> key_cols;
  for (const auto& g : opts.group_by) {
    const auto c = table.find(g);
    if (!c) throw Error(ErrorCode::UnknownGroupingKey, "no column named '" + g + "'");
    key_cols.push_back(*c);
  }
  auto require = [&](const std::string& name) {
    const auto c = table.find(name);
    if (!c) throw Error(ErrorCode::InvalidArgument, "no value column named '" + name + "'");
    return *c;
  };
  struct Source {
    std::size_t a;
    std::optional<std::size_t> b;
  };
  std::vector<Source> sources;
  for (const auto& v : opts.values) {
    sources.push_back({require(v), std::nullopt});
    out.value_columns.push_back(v);
  }
  for (const auto& [a, b] : opts.differences) {
    sources.push_back({require(a), require(b)});
    out.value_columns.push_back(a + "-" + b);
  }
  std::optional<std::size_t> exclude;
  if (!opts.exclude_column.empty()) exclude = require(opts.exclude_column);

  std::map<std::vector<std::string>, std::size_t> index;
  std::vector<std::vector<std::vector<double>>> samples;
  for (const auto& row : table.rows) {
    if (exclude && detail::truthy(row[*exclude])) continue;
    std::vector<std::string> key;
    for (auto c : key_cols) key.push_back(row[c]);
    auto [it, inserted] = index.try_emplace(key, out.rows.size());
    if (inserted) {
      out.rows.push_back(SummaryRow{key, {}});
      samples.emplace_back(sources.size());
    }
    auto& bucket = samples[it->second];
    for (std::size_t s = 0; s < sources.size(); ++s) {
      const auto a = detail::parse_number(row[sources[s].a]);
      if (!a) continue;
      if (sources[s].b) {
        const auto b = detail::parse_number(row[*sources[s].b]);
        if (!b) continue;
        bucket[s].push_back(*a - *b);
      } else {
        bucket[s].push_back(*a);
      }
    }
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    for (const auto& vals : samples[r]) out.rows[r].values.push_back(stats::mean_sd(vals));
  }
  return out;
}

}  // namespace sononav

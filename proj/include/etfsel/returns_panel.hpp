#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "etfsel/errors.hpp"

namespace etfsel {

// Dated panel of simple monthly returns (decimal units). Dates are YYYY-MM
// strings kept strictly increasing; a NaN cell marks a missing observation,
// allowed only before alignment.
struct ReturnsPanel {
  std::vector<std::string> dates;   // length T
  std::vector<std::string> labels;  // length n, unique tickers
  Eigen::MatrixXd values;           // T x n

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  void validate(bool allow_missing = false) const {
    if (static_cast<Eigen::Index>(dates.size()) != values.rows())
      throw validation_error("panel: date count does not match row count");
    if (static_cast<Eigen::Index>(labels.size()) != values.cols())
      throw validation_error("panel: label count does not match column count");
    for (std::size_t i = 1; i < dates.size(); ++i) {
      if (dates[i] <= dates[i - 1])
        throw validation_error("panel: dates not strictly increasing at " + dates[i]);
    }
    std::set<std::string> seen(labels.begin(), labels.end());
    if (seen.size() != labels.size())
      throw validation_error("panel: duplicate column label");
    if (!allow_missing && !values.allFinite())
      throw validation_error("panel: missing or non-finite entries");
  }
};

struct AlignedData {
  ReturnsPanel targets;     // T x q
  ReturnsPanel candidates;  // T x p

  Eigen::Index T() const { return targets.rows(); }
  Eigen::Index q() const { return targets.cols(); }
  Eigen::Index p() const { return candidates.cols(); }
};

namespace detail {

inline bool valid_month(const std::string& s) {
  if (s.size() != 7 || s[4] != '-') return false;
  for (int i : {0, 1, 2, 3, 5, 6})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  const int m = (s[5] - '0') * 10 + (s[6] - '0');
  return m >= 1 && m <= 12;
}

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace detail

// Loads a comma-delimited returns file. Header row required; `date_column`
// names the month column (YYYY-MM). Empty cells become NaN (missing); any
// other non-numeric cell is an error. Rows come back sorted by date.
inline ReturnsPanel load_returns_csv(const std::string& path, const std::string& date_column) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open returns file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);

  std::size_t date_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == date_column) date_idx = i;
  if (date_idx == header.size())
    throw parse_error(path + ": date column '" + date_column + "' not in header");

  ReturnsPanel panel;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (i != date_idx) panel.labels.push_back(header[i]);

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::trim(line).empty()) continue;
    const std::vector<std::string> cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw parse_error(path + ": row " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    const std::string& date = cells[date_idx];
    if (!detail::valid_month(date))
      throw parse_error(path + ": row " + std::to_string(lineno) +
                        ": malformed date '" + date + "' (want YYYY-MM)");
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == date_idx) continue;
      const std::string& cell = cells[i];
      if (cell.empty()) {
        row.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != cell.size())
        throw parse_error(path + ": row " + std::to_string(lineno) + ", column '" +
                          header[i] + "': cannot parse '" + cell + "' as a number");
      row.push_back(v);
    }
    panel.dates.push_back(date);
    rows.push_back(std::move(row));
  }

  // sort rows ascending by date, rejecting duplicates
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return panel.dates[a] < panel.dates[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (panel.dates[order[i]] == panel.dates[order[i - 1]])
      throw validation_error(path + ": duplicate date " + panel.dates[order[i]]);

  const Eigen::Index T = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index n = static_cast<Eigen::Index>(panel.labels.size());
  panel.values.resize(T, n);
  std::vector<std::string> sorted_dates(rows.size());
  for (Eigen::Index t = 0; t < T; ++t) {
    sorted_dates[t] = panel.dates[order[t]];
    for (Eigen::Index j = 0; j < n; ++j) panel.values(t, j) = rows[order[t]][j];
  }
  panel.dates = std::move(sorted_dates);
  panel.validate(/*allow_missing=*/true);
  return panel;
}

inline void save_returns_csv(const ReturnsPanel& panel, const std::string& path,
                             const std::string& date_column = "date") {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write returns file: " + path);
  out << date_column;
  for (const auto& l : panel.labels) out << ',' << l;
  out << '\n';
  char buf[40];
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    out << panel.dates[t];
    for (Eigen::Index j = 0; j < panel.cols(); ++j) {
      if (std::isnan(panel.values(t, j))) {
        out << ',';
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", panel.values(t, j));
        out << ',' << buf;
      }
    }
    out << '\n';
  }
}

// Restricts a panel to dates in [start, end] (either bound may be empty).
inline ReturnsPanel slice_window(const ReturnsPanel& panel, const std::string& start,
                                 const std::string& end) {
  if (!start.empty() && !detail::valid_month(start))
    throw config_error("bad window start '" + start + "' (want YYYY-MM)");
  if (!end.empty() && !detail::valid_month(end))
    throw config_error("bad window end '" + end + "' (want YYYY-MM)");
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    if (!start.empty() && panel.dates[t] < start) continue;
    if (!end.empty() && panel.dates[t] > end) continue;
    keep.push_back(t);
  }
  ReturnsPanel out;
  out.labels = panel.labels;
  out.dates.reserve(keep.size());
  out.values.resize(static_cast<Eigen::Index>(keep.size()), panel.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.dates.push_back(panel.dates[keep[i]]);
    out.values.row(static_cast<Eigen::Index>(i)) = panel.values.row(keep[i]);
  }
  return out;
}

// Aligns the two panels on their common dates. Candidate columns with missing
// values inside the window are dropped with a warning (never imputed); a
// missing value in a target column is an error. Requires T >= p + 2 so the
// F-statistic denominator T-1-k stays positive for every model.
inline AlignedData align_panels(const ReturnsPanel& targets, const ReturnsPanel& candidates) {
  if (targets.rows() == 0 || candidates.rows() == 0)
    throw validation_error("align: empty input panel");

  std::set<std::string> tset(targets.dates.begin(), targets.dates.end());
  std::vector<std::string> common;
  for (const auto& d : candidates.dates)
    if (tset.count(d)) common.push_back(d);
  if (common.empty()) throw validation_error("align: no overlapping dates between panels");

  auto restrict_rows = [&](const ReturnsPanel& p) {
    std::unordered_map<std::string, Eigen::Index> where;
    for (Eigen::Index t = 0; t < p.rows(); ++t) where[p.dates[t]] = t;
    ReturnsPanel out;
    out.labels = p.labels;
    out.dates = common;
    out.values.resize(static_cast<Eigen::Index>(common.size()), p.cols());
    for (std::size_t i = 0; i < common.size(); ++i)
      out.values.row(static_cast<Eigen::Index>(i)) = p.values.row(where.at(common[i]));
    return out;
  };

  AlignedData out;
  out.targets = restrict_rows(targets);
  out.candidates = restrict_rows(candidates);

  for (Eigen::Index j = 0; j < out.targets.cols(); ++j)
    if (!out.targets.values.col(j).allFinite())
      throw validation_error("align: target column '" + out.targets.labels[j] +
                             "' has missing values in the aligned window");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < out.candidates.cols(); ++j) {
    if (out.candidates.values.col(j).allFinite()) {
      keep.push_back(j);
    } else {
      warn("align: dropping candidate '" + out.candidates.labels[j] +
           "' (missing values in window)");
    }
  }
  if (keep.size() != static_cast<std::size_t>(out.candidates.cols())) {
    ReturnsPanel kept;
    kept.dates = out.candidates.dates;
    kept.values.resize(out.candidates.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) {
      kept.labels.push_back(out.candidates.labels[keep[i]]);
      kept.values.col(static_cast<Eigen::Index>(i)) = out.candidates.values.col(keep[i]);
    }
    out.candidates = std::move(kept);
  }

  if (out.candidates.cols() == 0)
    throw validation_error("align: no candidate columns fully observed in window");
  if (out.T() < out.p() + 2)
    throw validation_error("align: sample size T=" + std::to_string(out.T()) +
                           " too small for p=" + std::to_string(out.p()) +
                           " candidates (need T >= p + 2)");
  out.targets.validate();
  out.candidates.validate();
  return out;
}

// Optional excess-return adjustment: subtract the named column from every
// other column of both panels, then remove it from the panel carrying it.
inline void apply_risk_free(ReturnsPanel& targets, ReturnsPanel& candidates,
                            const std::string& rf_column) {
  auto find = [&](const ReturnsPanel& p) -> Eigen::Index {
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (p.labels[j] == rf_column) return j;
    return -1;
  };
  const Eigen::Index jt = find(targets), jc = find(candidates);
  if (jt < 0 && jc < 0)
    throw lookup_error("risk-free column '" + rf_column + "' not found in either panel");
  const Eigen::VectorXd rf = jt >= 0 ? targets.values.col(jt) : candidates.values.col(jc);
  if (targets.rows() != candidates.rows() || targets.dates != candidates.dates)
    throw validation_error("risk-free adjustment requires aligned panels");

  auto subtract_and_drop = [&](ReturnsPanel& p, Eigen::Index skip) {
    for (Eigen::Index j = 0; j < p.cols(); ++j)
      if (j != skip) p.values.col(j) -= rf;
    if (skip >= 0) {
      ReturnsPanel kept;
      kept.dates = p.dates;
      kept.values.resize(p.rows(), p.cols() - 1);
      Eigen::Index w = 0;
      for (Eigen::Index j = 0; j < p.cols(); ++j) {
        if (j == skip) continue;
        kept.labels.push_back(p.labels[j]);
        kept.values.col(w++) = p.values.col(j);
      }
      p = std::move(kept);
    }
  };
  subtract_and_drop(targets, jt);
  subtract_and_drop(candidates, jc);
}

}  // namespace etfsel

#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/lasso_path.hpp"
#include "etfsel/latent_factor.hpp"
#include "etfsel/portfolio.hpp"
#include "etfsel/selection.hpp"
#include "etfsel/ssvs.hpp"

namespace etfsel {

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string join(const std::vector<std::string>& v, char sep) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += v[i];
  }
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(s);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

}  // namespace detail

// --- conditional draw records -----------------------------------------------
// One record per retained sweep: gamma as a bitstring, per-column sigma, and
// the nonzero beta entries.

inline void save_conditional_draws(const std::vector<ConditionalDraw>& draws,
                                   const std::vector<std::string>& candidate_labels,
                                   const std::vector<std::string>& target_labels,
                                   const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write draw file: " + path);
  if (draws.empty()) throw config_error("no conditional draws to write");
  const Eigen::Index p = draws.front().beta.rows(), q = draws.front().beta.cols();
  out << "conditional_draws p=" << p << " q=" << q << '\n';
  out << "candidates " << detail::join(candidate_labels, ',') << '\n';
  out << "targets " << detail::join(target_labels, ',') << '\n';
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const ConditionalDraw& cd = draws[d];
    out << "draw " << d << '\n';
    out << "gamma " << cd.gamma.bitstring() << '\n';
    out << "sigma";
    for (Eigen::Index i = 0; i < q; ++i) out << ' ' << detail::fmt(cd.sigma[i]);
    out << '\n';
    for (Eigen::Index j = 0; j < p; ++j)
      for (Eigen::Index i = 0; i < q; ++i)
        if (cd.beta(j, i) != 0.0)
          out << "beta " << j << ' ' << i << ' ' << detail::fmt(cd.beta(j, i)) << '\n';
    out << "end\n";
  }
}

struct ConditionalDrawFile {
  std::vector<ConditionalDraw> draws;
  std::vector<std::string> candidate_labels;
  std::vector<std::string> target_labels;
};

inline ConditionalDrawFile load_conditional_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open draw file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ": empty draw file");
  Eigen::Index p = 0, q = 0;
  if (std::sscanf(line.c_str(), "conditional_draws p=%ld q=%ld", &p, &q) != 2)
    throw parse_error(path + ": bad header '" + line + "'");
  ConditionalDrawFile file;
  if (!std::getline(in, line) || line.rfind("candidates ", 0) != 0)
    throw parse_error(path + ": missing candidates line");
  file.candidate_labels = detail::split(line.substr(11), ',');
  if (!std::getline(in, line) || line.rfind("targets ", 0) != 0)
    throw parse_error(path + ": missing targets line");
  file.target_labels = detail::split(line.substr(8), ',');
  if (static_cast<Eigen::Index>(file.candidate_labels.size()) != p ||
      static_cast<Eigen::Index>(file.target_labels.size()) != q)
    throw parse_error(path + ": label counts disagree with header dimensions");

  ConditionalDraw cur;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.rfind("draw ", 0) == 0) {
      if (open) throw parse_error(path + ": draw record not closed");
      cur = ConditionalDraw{};
      cur.gamma = ModelIndicator::empty(static_cast<int>(p));
      cur.beta = Eigen::MatrixXd::Zero(p, q);
      open = true;
    } else if (line.rfind("gamma ", 0) == 0) {
      const std::string bits = line.substr(6);
      if (static_cast<Eigen::Index>(bits.size()) != p)
        throw parse_error(path + ": gamma bitstring length != p");
      for (Eigen::Index j = 0; j < p; ++j)
        cur.gamma.set(static_cast<int>(j), bits[static_cast<std::size_t>(j)] == '1');
    } else if (line.rfind("sigma ", 0) == 0) {
      const auto cells = detail::split(line.substr(6), ' ');
      if (static_cast<Eigen::Index>(cells.size()) != q)
        throw parse_error(path + ": sigma entry count != q");
      cur.sigma.resize(q);
      cur.psi_resid.resize(q);
      for (Eigen::Index i = 0; i < q; ++i) {
        cur.sigma[i] = std::stod(cells[static_cast<std::size_t>(i)]);
        cur.psi_resid[i] = cur.sigma[i] * cur.sigma[i];
      }
    } else if (line.rfind("beta ", 0) == 0) {
      long j = 0, i = 0;
      double v = 0.0;
      if (std::sscanf(line.c_str(), "beta %ld %ld %lf", &j, &i, &v) != 3)
        throw parse_error(path + ": bad beta line '" + line + "'");
      if (j < 0 || j >= p || i < 0 || i >= q)
        throw parse_error(path + ": beta index out of range");
      cur.beta(j, i) = v;
    } else if (line == "end") {
      if (!open) throw parse_error(path + ": stray end");
      file.draws.push_back(cur);
      open = false;
    } else if (!line.empty()) {
      throw parse_error(path + ": unrecognized line '" + line + "'");
    }
  }
  if (open) throw parse_error(path + ": truncated final record");
  if (file.draws.empty()) throw parse_error(path + ": no draws");
  return file;
}

// --- factor draw records -----------------------------------------------------
// Per retained sweep: mu_x and the lower triangle of Sigma_x, row major.

inline void save_factor_draws(const std::vector<FactorDraw>& draws,
                              const std::vector<std::string>& candidate_labels,
                              const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write draw file: " + path);
  if (draws.empty()) throw config_error("no factor draws to write");
  const Eigen::Index p = draws.front().mu_x.size();
  out << "factor_draws p=" << p << '\n';
  out << "candidates " << detail::join(candidate_labels, ',') << '\n';
  for (std::size_t d = 0; d < draws.size(); ++d) {
    out << "draw " << d << '\n';
    out << "mu";
    for (Eigen::Index j = 0; j < p; ++j) out << ' ' << detail::fmt(draws[d].mu_x[j]);
    out << '\n';
    out << "sigma_lower";
    for (Eigen::Index r = 0; r < p; ++r)
      for (Eigen::Index c = 0; c <= r; ++c) out << ' ' << detail::fmt(draws[d].sigma_x(r, c));
    out << '\n';
    out << "end\n";
  }
}

struct FactorDrawFile {
  std::vector<FactorDraw> draws;  // B and psi are not serialized; sigma_x/mu_x only
  std::vector<std::string> candidate_labels;
};

inline FactorDrawFile load_factor_draws(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open draw file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ": empty draw file");
  Eigen::Index p = 0;
  if (std::sscanf(line.c_str(), "factor_draws p=%ld", &p) != 1)
    throw parse_error(path + ": bad header '" + line + "'");
  FactorDrawFile file;
  if (!std::getline(in, line) || line.rfind("candidates ", 0) != 0)
    throw parse_error(path + ": missing candidates line");
  file.candidate_labels = detail::split(line.substr(11), ',');
  if (static_cast<Eigen::Index>(file.candidate_labels.size()) != p)
    throw parse_error(path + ": label count disagrees with header dimension");

  FactorDraw cur;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.rfind("draw ", 0) == 0) {
      if (open) throw parse_error(path + ": draw record not closed");
      cur = FactorDraw{};
      open = true;
    } else if (line.rfind("mu ", 0) == 0) {
      const auto cells = detail::split(line.substr(3), ' ');
      if (static_cast<Eigen::Index>(cells.size()) != p)
        throw parse_error(path + ": mu entry count != p");
      cur.mu_x.resize(p);
      for (Eigen::Index j = 0; j < p; ++j) cur.mu_x[j] = std::stod(cells[static_cast<std::size_t>(j)]);
    } else if (line.rfind("sigma_lower ", 0) == 0) {
      const auto cells = detail::split(line.substr(12), ' ');
      if (static_cast<Eigen::Index>(cells.size()) != p * (p + 1) / 2)
        throw parse_error(path + ": sigma_lower entry count mismatch");
      cur.sigma_x.resize(p, p);
      std::size_t at = 0;
      for (Eigen::Index r = 0; r < p; ++r)
        for (Eigen::Index c = 0; c <= r; ++c) {
          const double v = std::stod(cells[at++]);
          cur.sigma_x(r, c) = v;
          cur.sigma_x(c, r) = v;
        }
    } else if (line == "end") {
      if (!open) throw parse_error(path + ": stray end");
      file.draws.push_back(cur);
      open = false;
    } else if (!line.empty()) {
      throw parse_error(path + ": unrecognized line '" + line + "'");
    }
  }
  if (open) throw parse_error(path + ": truncated final record");
  if (file.draws.empty()) throw parse_error(path + ": no draws");
  return file;
}

// --- flat CSV outputs ---------------------------------------------------------

inline void save_inclusion_csv(const Eigen::VectorXd& inclusion,
                               const std::vector<std::string>& labels, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << "ticker,probability\n";
  for (Eigen::Index j = 0; j < inclusion.size(); ++j)
    out << labels[static_cast<std::size_t>(j)] << ',' << detail::fmt(inclusion[j]) << '\n';
}

inline void save_path_csv(const LossPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw config_error("cannot write " + file);
  out << "lambda,model_size,loss_mean,loss_q05,loss_q40,loss_q60,loss_q95\n";
  for (Eigen::Index i = 0; i < path.lambdas.size(); ++i) {
    std::vector<double> losses(path.loss_draws[static_cast<std::size_t>(i)].data(),
                               path.loss_draws[static_cast<std::size_t>(i)].data() +
                                   path.loss_draws[static_cast<std::size_t>(i)].size());
    out << detail::fmt(path.lambdas[i]) << ',' << path.model_sizes[static_cast<std::size_t>(i)]
        << ',' << detail::fmt(path.loss_draws[static_cast<std::size_t>(i)].mean()) << ','
        << detail::fmt(quantile(losses, 0.05)) << ',' << detail::fmt(quantile(losses, 0.40))
        << ',' << detail::fmt(quantile(losses, 0.60)) << ','
        << detail::fmt(quantile(losses, 0.95)) << '\n';
  }
}

inline void save_edge_list(const SelectionGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  for (const auto& [cand, target] : graph.edges) out << cand << '\t' << target << '\n';
}

inline std::vector<std::pair<std::string, std::string>> load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open edge list: " + path);
  std::vector<std::pair<std::string, std::string>> edges;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw parse_error(path + ": edge line missing tab");
    edges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return edges;
}

inline void save_weights_csv(const PortfolioWeights& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << "ticker,weight\n";
  for (Eigen::Index j = 0; j < w.w.size(); ++j)
    out << w.tickers[static_cast<std::size_t>(j)] << ',' << detail::fmt(w.w[j]) << '\n';
}

inline PortfolioWeights load_weights_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open weights file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw parse_error(path + ": empty weights file");
  PortfolioWeights w;
  std::vector<double> vals;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw parse_error(path + ": weights line missing comma");
    w.tickers.push_back(line.substr(0, comma));
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  if (vals.empty()) throw parse_error(path + ": no weight rows");
  w.w = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  const double s = w.w.sum();
  if (std::abs(s - 1.0) > 1e-8)
    throw validation_error(path + ": weights sum to " + detail::fmt(s) + ", expected 1");
  if ((w.w.array() < 0).any()) throw validation_error(path + ": negative weight");
  return w;
}

inline void save_sharpe_samples_csv(const std::vector<SharpeSamples>& all,
                                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << "label,draw_index,sharpe\n";
  for (const auto& s : all)
    for (Eigen::Index i = 0; i < s.values.size(); ++i)
      out << s.label << ',' << i << ',' << detail::fmt(s.values[i]) << '\n';
}

}  // namespace etfsel

#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/lasso_path.hpp"

namespace etfsel {

// Empirical quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double qq) {
  if (values.empty()) throw config_error("quantile of empty sample");
  if (qq < 0.0 || qq > 1.0) throw config_error("quantile level outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = qq * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

// Bipartite edges between selected candidates and target assets.
struct SelectionGraph {
  std::vector<std::pair<std::string, std::string>> edges;  // (candidate, target)
  std::set<std::string> selected_candidates;
  std::size_t path_index = 0;  // chosen point on the loss path
};

// Quantile-band heuristic: take the [low,high] quantile interval of the
// densest point's per-draw losses, then return the sparsest path point whose
// mean per-draw loss falls inside it. Falls back to the densest point.
inline SelectionGraph select_model(const LossPath& path, std::pair<double, double> band,
                                   const std::vector<std::string>& candidate_labels,
                                   const std::vector<std::string>& target_labels,
                                   double edge_threshold = 1e-8) {
  if (path.actions.empty()) throw config_error("select_model: empty path");
  if (!(band.first >= 0.0 && band.first < band.second && band.second <= 1.0))
    throw config_error("select_model: need 0 <= low < high <= 1");

  const std::size_t dense = path.actions.size() - 1;
  std::vector<double> dense_losses(path.loss_draws[dense].data(),
                                   path.loss_draws[dense].data() + path.loss_draws[dense].size());
  const double lo = quantile(dense_losses, band.first);
  const double hi = quantile(dense_losses, band.second);

  std::size_t chosen = dense;
  bool found = false;
  for (std::size_t i = 0; i < path.actions.size(); ++i) {
    const double mean_loss = path.loss_draws[i].mean();
    if (mean_loss >= lo && mean_loss <= hi) {
      chosen = i;
      found = true;
      break;
    }
  }
  if (!found)
    warn("select_model: no path point inside the dense quantile band; returning densest");

  SelectionGraph graph;
  graph.path_index = chosen;
  const Eigen::MatrixXd& action = path.actions[chosen].gamma;
  for (Eigen::Index m = 0; m < action.cols(); ++m) {
    for (Eigen::Index i = 0; i < action.rows(); ++i) {
      if (std::abs(action(i, m)) > edge_threshold) {
        graph.edges.emplace_back(candidate_labels[static_cast<std::size_t>(m)],
                                 target_labels[static_cast<std::size_t>(i)]);
        graph.selected_candidates.insert(candidate_labels[static_cast<std::size_t>(m)]);
      }
    }
  }
  return graph;
}

}  // namespace etfsel

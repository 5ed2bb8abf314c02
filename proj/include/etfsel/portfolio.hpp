#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/latent_factor.hpp"
#include "etfsel/rng.hpp"
#include "etfsel/ssvs.hpp"

namespace etfsel {

// Long-only weights on a named asset subset; sums to one.
struct PortfolioWeights {
  std::vector<std::string> tickers;
  Eigen::VectorXd w;
};

struct SharpeSamples {
  std::string label;
  Eigen::VectorXd values;  // one Sharpe ratio per posterior draw (monthly units)
};

inline double sharpe_per_draw(const Eigen::VectorXd& w, const Eigen::VectorXd& mu,
                              const Eigen::MatrixXd& sigma) {
  const double var = w.dot(sigma * w);
  if (!(var > 0.0)) throw numerical_error("sharpe_per_draw: nonpositive portfolio variance");
  return w.dot(mu) / std::sqrt(var);
}

// Per-draw first and second moments for a named asset universe.
struct DrawMoments {
  std::vector<std::string> tickers;
  std::vector<Eigen::VectorXd> mu;     // one per draw
  std::vector<Eigen::MatrixXd> sigma;  // one per draw

  std::size_t n_draws() const { return mu.size(); }
  Eigen::Index dim() const { return mu.empty() ? 0 : mu.front().size(); }
};

// Candidate universe: (mu_x, Sigma_x) straight from the factor draws.
inline DrawMoments candidate_universe(const std::vector<FactorDraw>& factor,
                                      const std::vector<std::string>& labels) {
  DrawMoments dm;
  dm.tickers = labels;
  dm.mu.reserve(factor.size());
  dm.sigma.reserve(factor.size());
  for (const auto& d : factor) {
    dm.mu.push_back(d.mu_x);
    dm.sigma.push_back(d.sigma_x);
  }
  return dm;
}

// Target universe implied by the joint model: mu = beta' mu_x,
// Sigma = beta' Sigma_x beta + diag(psi_resid).
inline DrawMoments target_universe(const std::vector<ConditionalDraw>& conditional,
                                   const std::vector<FactorDraw>& factor,
                                   const std::vector<std::string>& labels) {
  if (conditional.size() != factor.size())
    throw pairing_error("target_universe: draw lists differ in length");
  DrawMoments dm;
  dm.tickers = labels;
  for (std::size_t d = 0; d < conditional.size(); ++d) {
    const Eigen::MatrixXd bt = conditional[d].beta.transpose();  // q x p
    dm.mu.push_back(bt * factor[d].mu_x);
    Eigen::MatrixXd s = bt * factor[d].sigma_x * bt.transpose();
    s.diagonal() += conditional[d].psi_resid;
    dm.sigma.push_back(std::move(s));
  }
  return dm;
}

inline DrawMoments restrict_universe(const DrawMoments& dm,
                                     const std::vector<std::string>& subset) {
  std::vector<Eigen::Index> idx;
  for (const auto& t : subset) {
    bool found = false;
    for (std::size_t j = 0; j < dm.tickers.size(); ++j) {
      if (dm.tickers[j] == t) {
        idx.push_back(static_cast<Eigen::Index>(j));
        found = true;
        break;
      }
    }
    if (!found) throw lookup_error("unknown ticker '" + t + "' in universe");
  }
  DrawMoments out;
  out.tickers = subset;
  const Eigen::Index k = static_cast<Eigen::Index>(idx.size());
  for (std::size_t d = 0; d < dm.n_draws(); ++d) {
    Eigen::VectorXd mu(k);
    Eigen::MatrixXd sig(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
      mu[a] = dm.mu[d][idx[static_cast<std::size_t>(a)]];
      for (Eigen::Index b = 0; b < k; ++b)
        sig(a, b) = dm.sigma[d](idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    }
    out.mu.push_back(std::move(mu));
    out.sigma.push_back(std::move(sig));
  }
  return out;
}

struct DEConfig {
  double weight_f = 0.8;   // differential weight
  double crossover = 0.9;  // binomial crossover probability
  int pop_mult = 10;       // population = pop_mult * dimension
  int max_generations = 600;
  int stall_generations = 80;
  double stall_tol = 1e-12;
};

namespace detail {

inline void project_simplex(Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = std::max(v[i], 0.0);
  const double s = v.sum();
  if (s <= 0.0)
    v.setConstant(1.0 / static_cast<double>(v.size()));
  else
    v /= s;
}

inline double mean_sharpe(const Eigen::VectorXd& w, const DrawMoments& dm) {
  double acc = 0.0;
  for (std::size_t d = 0; d < dm.n_draws(); ++d) {
    const double var = w.dot(dm.sigma[d] * w);
    if (!(var > 0.0)) return -std::numeric_limits<double>::infinity();
    acc += w.dot(dm.mu[d]) / std::sqrt(var);
  }
  return acc / static_cast<double>(dm.n_draws());
}

}  // namespace detail

// Maximizes the posterior-mean Sharpe ratio over the long-only simplex with
// rand/1/bin differential evolution. Trial vectors are made feasible by
// clipping negatives and renormalizing. Deterministic under a fixed seed.
inline PortfolioWeights maximize_posterior_mean_sharpe(const DrawMoments& universe,
                                                       const std::vector<std::string>& subset,
                                                       const DEConfig& cfg, std::uint64_t seed) {
  if (subset.empty()) throw config_error("portfolio optimization over an empty subset");
  const DrawMoments dm = restrict_universe(universe, subset);
  if (dm.n_draws() == 0) throw config_error("portfolio optimization without draws");
  const Eigen::Index dim = dm.dim();

  PortfolioWeights best;
  best.tickers = subset;
  if (dim == 1) {
    best.w = Eigen::VectorXd::Ones(1);
    return best;
  }

  Rng rng(seed);
  const int pop_size = std::max(cfg.pop_mult * static_cast<int>(dim), 15);
  std::vector<Eigen::VectorXd> pop;
  std::vector<double> score(static_cast<std::size_t>(pop_size));
  pop.reserve(static_cast<std::size_t>(pop_size));

  // uniform point, then simplex vertices, then random interior points
  pop.push_back(Eigen::VectorXd::Constant(dim, 1.0 / static_cast<double>(dim)));
  for (Eigen::Index j = 0; j < dim && pop.size() < static_cast<std::size_t>(pop_size); ++j)
    pop.push_back(Eigen::VectorXd::Unit(dim, j));
  while (pop.size() < static_cast<std::size_t>(pop_size)) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index j = 0; j < dim; ++j) v[j] = -std::log(rng.uniform());
    v /= v.sum();
    pop.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < pop.size(); ++i) score[i] = detail::mean_sharpe(pop[i], dm);

  std::size_t best_idx = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (score[i] > score[best_idx]) best_idx = i;
  double best_score = score[best_idx];
  int stall = 0;

  for (int gen = 0; gen < cfg.max_generations && stall < cfg.stall_generations; ++gen) {
    for (std::size_t i = 0; i < pop.size(); ++i) {
      std::size_t r1, r2, r3;
      do { r1 = rng.uniform_index(pop.size()); } while (r1 == i);
      do { r2 = rng.uniform_index(pop.size()); } while (r2 == i || r2 == r1);
      do { r3 = rng.uniform_index(pop.size()); } while (r3 == i || r3 == r1 || r3 == r2);
      Eigen::VectorXd trial = pop[i];
      const Eigen::Index jrand = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(dim)));
      for (Eigen::Index j = 0; j < dim; ++j) {
        if (j == jrand || rng.uniform() <= cfg.crossover)
          trial[j] = pop[r1][j] + cfg.weight_f * (pop[r2][j] - pop[r3][j]);
      }
      detail::project_simplex(trial);
      const double s = detail::mean_sharpe(trial, dm);
      if (s >= score[i]) {
        pop[i] = std::move(trial);
        score[i] = s;
      }
    }
    std::size_t gen_best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
      if (score[i] > score[gen_best]) gen_best = i;
    if (score[gen_best] > best_score + cfg.stall_tol) {
      stall = 0;
    } else {
      ++stall;
    }
    if (score[gen_best] > best_score) {
      best_score = score[gen_best];
      best_idx = gen_best;
    }
  }

  best.w = pop[best_idx];
  detail::project_simplex(best.w);
  return best;
}

// Per-draw unconstrained tangency Sharpe sqrt(mu' Sigma^{-1} mu). Draws with
// a numerically singular covariance are skipped; more than 1% skipped is an
// error.
inline SharpeSamples tangency_sharpe_distribution(const DrawMoments& dm,
                                                  const std::string& label) {
  std::vector<double> vals;
  vals.reserve(dm.n_draws());
  std::size_t skipped = 0;
  for (std::size_t d = 0; d < dm.n_draws(); ++d) {
    Eigen::LLT<Eigen::MatrixXd> llt(dm.sigma[d]);
    if (llt.info() != Eigen::Success) {
      ++skipped;
      continue;
    }
    vals.push_back(std::sqrt(dm.mu[d].dot(llt.solve(dm.mu[d]))));
  }
  if (skipped > 0) {
    warn("tangency: skipped " + std::to_string(skipped) + " draws with singular covariance");
    if (100 * skipped > dm.n_draws())
      throw numerical_error("tangency: more than 1% of draws had singular covariance");
  }
  SharpeSamples out;
  out.label = label;
  out.values = Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
  return out;
}

// Sharpe samples for a fixed weight vector across posterior draws.
inline SharpeSamples sharpe_distribution_for_weights(const PortfolioWeights& w,
                                                     const DrawMoments& universe,
                                                     const std::string& label) {
  const DrawMoments dm = restrict_universe(universe, w.tickers);
  SharpeSamples out;
  out.label = label;
  out.values.resize(static_cast<Eigen::Index>(dm.n_draws()));
  for (std::size_t d = 0; d < dm.n_draws(); ++d)
    out.values[static_cast<Eigen::Index>(d)] = sharpe_per_draw(w.w, dm.mu[d], dm.sigma[d]);
  return out;
}

}  // namespace etfsel

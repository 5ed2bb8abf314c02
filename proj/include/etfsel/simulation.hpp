#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/latent_factor.hpp"
#include "etfsel/portfolio.hpp"
#include "etfsel/returns_panel.hpp"
#include "etfsel/rng.hpp"
#include "etfsel/ssvs.hpp"

namespace etfsel {

// Data-generating moments for the recovery study: candidates are drawn
// N(mu_x, sigma_x) and targets follow the conditional regression with
// per-column residual variances psi.
struct GeneratingMoments {
  Eigen::VectorXd mu_x;     // p
  Eigen::MatrixXd sigma_x;  // p x p, PD
  Eigen::MatrixXd beta;     // p x q
  Eigen::VectorXd psi;      // q
  std::vector<std::string> candidate_labels;
  std::vector<std::string> target_labels;

  Eigen::Index p() const { return mu_x.size(); }
  Eigen::Index q() const { return psi.size(); }

  // Implied target-universe moments and their tangency Sharpe ratio.
  Eigen::VectorXd target_mu() const { return beta.transpose() * mu_x; }
  Eigen::MatrixXd target_sigma() const {
    Eigen::MatrixXd s = beta.transpose() * sigma_x * beta;
    s.diagonal() += psi;
    return s;
  }
  double tangency_sharpe() const {
    const Eigen::VectorXd mu = target_mu();
    return std::sqrt(mu.dot(target_sigma().llt().solve(mu)));
  }
};

namespace detail {

inline std::string month_label(int index) {
  const int year = 1990 + index / 12;
  const int month = 1 + index % 12;
  char buf[8];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

}  // namespace detail

// Bundled synthetic moments (p=10, q=4, two latent factors, three true
// candidates) in monthly-return units.
inline GeneratingMoments default_generating_moments() {
  const int p = 10, q = 4, k = 2;
  GeneratingMoments gm;
  gm.mu_x.resize(p);
  Eigen::MatrixXd B(p, k);
  Eigen::VectorXd psi_x(p);
  for (int j = 0; j < p; ++j) {
    gm.mu_x[j] = 0.004 + 0.0003 * j;
    B(j, 0) = 0.035 + 0.002 * j;
    B(j, 1) = 0.018 - 0.003 * j;
    const double idio = 0.015 + 0.001 * (j % 4);
    psi_x[j] = idio * idio;
  }
  gm.sigma_x = B * B.transpose();
  gm.sigma_x.diagonal() += psi_x;

  gm.beta = Eigen::MatrixXd::Zero(p, q);
  gm.beta.row(0) << 0.9, 0.5, 0.0, 0.3;
  gm.beta.row(3) << 0.0, 0.6, 0.8, -0.4;
  gm.beta.row(7) << 0.4, -0.3, 0.5, 0.7;

  // residual variances set for per-target R^2 = 0.6
  const Eigen::MatrixXd signal = gm.beta.transpose() * gm.sigma_x * gm.beta;
  gm.psi.resize(q);
  for (int i = 0; i < q; ++i) gm.psi[i] = signal(i, i) * (1.0 - 0.6) / 0.6;

  for (int j = 0; j < p; ++j) gm.candidate_labels.push_back("ETF" + std::to_string(j));
  for (int i = 0; i < q; ++i) gm.target_labels.push_back("FAC" + std::to_string(i));
  return gm;
}

// Synthetic selection instance with n_true generating candidates and
// residual variances calibrated to the requested per-target R^2.
inline GeneratingMoments synthetic_selection_moments(int p, int q, int n_true, double r_squared,
                                                     std::uint64_t seed) {
  if (n_true > p) throw config_error("synthetic moments: n_true > p");
  if (!(r_squared > 0.0 && r_squared < 1.0))
    throw config_error("synthetic moments: R^2 must be in (0,1)");
  Rng rng(seed);
  GeneratingMoments gm;
  gm.mu_x.resize(p);
  const int k = 2;
  Eigen::MatrixXd B(p, k);
  Eigen::VectorXd psi_x(p);
  for (int j = 0; j < p; ++j) {
    gm.mu_x[j] = 0.003 + 0.004 * rng.uniform();
    B(j, 0) = 0.03 + 0.02 * rng.uniform();
    B(j, 1) = 0.02 * (rng.uniform() - 0.5);
    const double idio = 0.012 + 0.01 * rng.uniform();
    psi_x[j] = idio * idio;
  }
  gm.sigma_x = B * B.transpose();
  gm.sigma_x.diagonal() += psi_x;

  gm.beta = Eigen::MatrixXd::Zero(p, q);
  std::vector<int> rows(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) rows[static_cast<std::size_t>(j)] = j;
  rng.shuffle(rows);
  for (int a = 0; a < n_true; ++a)
    for (int i = 0; i < q; ++i) {
      const double mag = 0.3 + 0.7 * rng.uniform();
      gm.beta(rows[static_cast<std::size_t>(a)], i) = rng.bernoulli(0.5) ? mag : -mag;
    }

  const Eigen::MatrixXd signal = gm.beta.transpose() * gm.sigma_x * gm.beta;
  gm.psi.resize(q);
  for (int i = 0; i < q; ++i)
    gm.psi[i] = signal(i, i) * (1.0 - r_squared) / r_squared;

  for (int j = 0; j < p; ++j) gm.candidate_labels.push_back("ETF" + std::to_string(j));
  for (int i = 0; i < q; ++i) gm.target_labels.push_back("FAC" + std::to_string(i));
  return gm;
}

// Draws (X_sim, R_sim) from the generating moments as aligned panels.
inline AlignedData simulate_returns(const GeneratingMoments& gm, int T, Rng& rng) {
  const Eigen::Index p = gm.p(), q = gm.q();
  Eigen::LLT<Eigen::MatrixXd> llt(gm.sigma_x);
  if (llt.info() != Eigen::Success)
    throw validation_error("simulate_returns: sigma_x not positive definite");
  const Eigen::MatrixXd Lx = llt.matrixL();

  AlignedData out;
  out.candidates.labels = gm.candidate_labels;
  out.targets.labels = gm.target_labels;
  out.candidates.values.resize(T, p);
  out.targets.values.resize(T, q);
  for (int t = 0; t < T; ++t) {
    const std::string date = detail::month_label(t);
    out.candidates.dates.push_back(date);
    out.targets.dates.push_back(date);
    Eigen::VectorXd z(p);
    for (Eigen::Index j = 0; j < p; ++j) z[j] = rng.normal();
    out.candidates.values.row(t) = (gm.mu_x + Lx * z).transpose();
    for (Eigen::Index i = 0; i < q; ++i)
      out.targets.values(t, i) = out.candidates.values.row(t).dot(gm.beta.col(i)) +
                                 std::sqrt(gm.psi[i]) * rng.normal();
  }
  out.targets.validate();
  out.candidates.validate();
  return out;
}

struct PipelineConfig {
  ChainConfig chain;
  FactorConfig factor;

  static PipelineConfig defaults() {
    PipelineConfig cfg;
    cfg.chain.n_sweeps = 3000;
    cfg.chain.n_burn = 1000;
    cfg.chain.thin = 2;
    cfg.factor.n_sweeps = 3000;
    cfg.factor.n_burn = 1000;
    cfg.factor.thin = 2;
    return cfg;
  }

  int retained_chain() const { return (chain.n_sweeps - chain.n_burn + chain.thin - 1) / chain.thin; }
  int retained_factor() const {
    return (factor.n_sweeps - factor.n_burn + factor.thin - 1) / factor.thin;
  }
};

struct RecoveryReport {
  Eigen::MatrixXd beta_true;       // p x q
  Eigen::MatrixXd beta_post_mean;  // p x q
  double beta_rmse = 0.0;
  Eigen::VectorXd inclusion;       // p
  double true_tangency_sharpe = 0.0;
  Eigen::VectorXd tangency_samples;
  double truth_quantile = 0.0;  // fraction of posterior samples below the truth
};

// Simulates returns under the generating moments, refits the full pipeline,
// and reports beta recovery plus the posterior tangency-Sharpe distribution
// against its known true value.
inline RecoveryReport run_simulation_study(const GeneratingMoments& gm, int T,
                                           std::uint64_t seed, PipelineConfig cfg) {
  if (cfg.retained_chain() != cfg.retained_factor())
    throw config_error("simulation study: samplers must retain equal draw counts for pairing");
  Rng data_rng(seed);
  const AlignedData data = simulate_returns(gm, T, data_rng);

  cfg.chain.seed = seed ^ 0xc2b2ae3d27d4eb4full;
  cfg.factor.seed = seed ^ 0x9e3779b97f4a7c15ull;
  const ChainResult chain = run_chain(data, cfg.chain);
  const std::vector<FactorDraw> factor = fit_factor_model(data.candidates, cfg.factor);

  RecoveryReport rep;
  rep.beta_true = gm.beta;
  rep.inclusion = chain.inclusion;
  rep.beta_post_mean = Eigen::MatrixXd::Zero(gm.p(), gm.q());
  for (const auto& d : chain.draws) rep.beta_post_mean += d.beta;
  rep.beta_post_mean /= static_cast<double>(chain.draws.size());
  rep.beta_rmse = std::sqrt((rep.beta_post_mean - gm.beta).squaredNorm() /
                            static_cast<double>(gm.p() * gm.q()));

  rep.true_tangency_sharpe = gm.tangency_sharpe();
  const DrawMoments targets = target_universe(chain.draws, factor, gm.target_labels);
  rep.tangency_samples = tangency_sharpe_distribution(targets, "tangency_targets").values;
  rep.truth_quantile =
      (rep.tangency_samples.array() < rep.true_tangency_sharpe).cast<double>().mean();
  return rep;
}

}  // namespace etfsel

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/returns_panel.hpp"
#include "etfsel/rng.hpp"

namespace etfsel {

// One posterior draw from the marginal candidate-return model
// x_t = mu_x + B f_t + v_t, Sigma_x = B B' + diag(psi).
struct FactorDraw {
  Eigen::VectorXd mu_x;     // p
  Eigen::MatrixXd B;        // p x k
  Eigen::VectorXd psi;      // p, idiosyncratic variances
  Eigen::MatrixXd sigma_x;  // p x p
};

struct FactorPriors {
  double loading_var = 1.0;     // B_ij ~ N(0, loading_var)
  double psi_shape = 2.5;       // psi_j ~ InvGamma(psi_shape, psi_scale_mult * s2_j)
  double psi_scale_mult = 0.5;
  double mu_var_mult = 100.0;   // mu ~ N(0, mu_var_mult * mean(s2) * I)
};

struct FactorConfig {
  int k = -1;  // latent factor count; -1 = eigenvalue heuristic
  int n_sweeps = 10000;
  int n_burn = 2000;
  int thin = 5;
  std::uint64_t seed = 1;
  FactorPriors priors;
};

// Heuristic factor count: sample-correlation eigenvalues above 1, capped at 6
// and at p-1.
inline int default_factor_count(const Eigen::MatrixXd& X) {
  const Eigen::Index p = X.cols();
  if (p <= 1) return 0;
  const Eigen::MatrixXd Xc = X.rowwise() - X.colwise().mean();
  Eigen::MatrixXd S = Xc.transpose() * Xc / static_cast<double>(X.rows() - 1);
  Eigen::VectorXd sd = S.diagonal().array().sqrt();
  for (Eigen::Index i = 0; i < p; ++i) sd[i] = sd[i] > 0 ? sd[i] : 1.0;
  const Eigen::MatrixXd corr =
      sd.cwiseInverse().asDiagonal() * S * sd.cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(corr);
  int k = 0;
  for (Eigen::Index i = 0; i < p; ++i)
    if (es.eigenvalues()[i] > 1.0) ++k;
  return std::min({k, 6, static_cast<int>(p) - 1});
}

namespace detail {

// Cholesky with one jitter retry; used on full-conditional precisions that
// are PD in exact arithmetic.
inline Eigen::LLT<Eigen::MatrixXd> robust_llt(Eigen::MatrixXd A, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success) return llt;
  const double jitter = 1e-10 * std::max(1.0, A.diagonal().maxCoeff());
  A.diagonal().array() += jitter;
  llt.compute(A);
  if (llt.info() == Eigen::Success) return llt;
  throw numerical_error(std::string("factor sampler: non-PD ") + what +
                        " persists after jitter");
}

}  // namespace detail

// Conjugate data-augmentation Gibbs sampler. Cycle per sweep:
//   scores f_t | B, psi, mu  ->  rows of B | f, psi  ->  psi | rest
//   ->  mu | rest.
// No identification constraint on B; only Sigma_x and mu_x are consumed
// downstream and both are rotation invariant.
inline std::vector<FactorDraw> fit_factor_model(const Eigen::MatrixXd& X,
                                                const FactorConfig& cfg) {
  const int T = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  const int k = cfg.k < 0 ? default_factor_count(X) : cfg.k;
  if (k < 0 || k >= p)
    throw config_error("factor model: need 0 <= k < p (k=" + std::to_string(k) +
                       ", p=" + std::to_string(p) + ")");
  if (T <= k) throw config_error("factor model: need T > k");
  if (cfg.n_burn < 0 || cfg.n_sweeps <= cfg.n_burn)
    throw config_error("factor model: need n_sweeps > n_burn >= 0");
  if (cfg.thin < 1) throw config_error("factor model: thin must be >= 1");

  Rng rng(cfg.seed);
  const Eigen::VectorXd mean = X.colwise().mean();
  Eigen::VectorXd s2(p);
  for (int j = 0; j < p; ++j)
    s2[j] = (X.col(j).array() - mean[j]).square().sum() / std::max(1, T - 1);
  const double phi = cfg.priors.mu_var_mult * s2.mean();
  const double psi_a = cfg.priors.psi_shape;

  Eigen::VectorXd mu = mean;
  Eigen::VectorXd psi = s2.cwiseMax(1e-12);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(p, k);
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(T, k);

  std::vector<FactorDraw> draws;
  draws.reserve(static_cast<std::size_t>((cfg.n_sweeps - cfg.n_burn + cfg.thin - 1) / cfg.thin));

  for (int sweep = 0; sweep < cfg.n_sweeps; ++sweep) {
    const Eigen::MatrixXd Xc = X.rowwise() - mu.transpose();

    if (k > 0) {
      // scores: prec = I + B' psi^{-1} B, mean_t = prec^{-1} B' psi^{-1} xc_t
      const Eigen::MatrixXd Bw = psi.cwiseInverse().asDiagonal() * B;  // p x k
      Eigen::MatrixXd prec = Eigen::MatrixXd::Identity(k, k) + B.transpose() * Bw;
      const auto llt = detail::robust_llt(prec, "score precision");
      const Eigen::MatrixXd M = llt.solve((Xc * Bw).transpose());  // k x T means
      for (int t = 0; t < T; ++t) {
        Eigen::VectorXd z(k);
        for (int a = 0; a < k; ++a) z[a] = rng.normal();
        F.row(t) = (M.col(t) +
                    llt.matrixL().transpose().template solve<Eigen::OnTheLeft>(z))
                       .transpose();
      }

      // loadings row by row
      const Eigen::MatrixXd FtF = F.transpose() * F;
      for (int j = 0; j < p; ++j) {
        Eigen::MatrixXd prec_j =
            Eigen::MatrixXd::Identity(k, k) / cfg.priors.loading_var + FtF / psi[j];
        const auto llt_j = detail::robust_llt(prec_j, "loading precision");
        const Eigen::VectorXd mean_j = llt_j.solve(F.transpose() * Xc.col(j) / psi[j]);
        Eigen::VectorXd z(k);
        for (int a = 0; a < k; ++a) z[a] = rng.normal();
        B.row(j) =
            (mean_j + llt_j.matrixL().transpose().template solve<Eigen::OnTheLeft>(z))
                .transpose();
      }
    }

    // idiosyncratic variances
    const Eigen::MatrixXd resid = Xc - F * B.transpose();
    for (int j = 0; j < p; ++j) {
      const double rss = resid.col(j).squaredNorm();
      psi[j] = rng.inverse_gamma(psi_a + 0.5 * T,
                                 cfg.priors.psi_scale_mult * s2[j] + 0.5 * rss);
    }

    // mean, coordinate-wise (prior and psi both diagonal)
    const Eigen::MatrixXd defac = X - F * B.transpose();
    for (int j = 0; j < p; ++j) {
      const double prec_j = 1.0 / phi + T / psi[j];
      const double mean_j = (defac.col(j).sum() / psi[j]) / prec_j;
      mu[j] = mean_j + rng.normal() / std::sqrt(prec_j);
    }

    if (sweep < cfg.n_burn || (sweep - cfg.n_burn) % cfg.thin != 0) continue;
    FactorDraw d;
    d.mu_x = mu;
    d.B = B;
    d.psi = psi;
    d.sigma_x = B * B.transpose();
    d.sigma_x.diagonal() += psi;
    draws.push_back(std::move(d));
  }
  return draws;
}

inline std::vector<FactorDraw> fit_factor_model(const ReturnsPanel& X, const FactorConfig& cfg) {
  X.validate();
  return fit_factor_model(X.values, cfg);
}

}  // namespace etfsel

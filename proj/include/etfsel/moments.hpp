#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/latent_factor.hpp"
#include "etfsel/ssvs.hpp"

namespace etfsel {

struct DPolicy {
  enum class Kind { residual_precision, identity, fixed };
  Kind kind = Kind::residual_precision;
  Eigen::VectorXd fixed_d;  // diagonal entries when kind == fixed

  static DPolicy residual_precision() { return {Kind::residual_precision, {}}; }
  static DPolicy identity() { return {Kind::identity, {}}; }
  static DPolicy fixed(Eigen::VectorXd d) { return {Kind::fixed, std::move(d)}; }
};

// Posterior cross-moments feeding the integrated conditional loss:
//   H = E[Sigma_x + mu_x mu_x'],  f = E[beta' Sigma_x + mu_r mu_x'],
// with mu_r = beta' mu_x implied per draw and H = L L'.
struct PosteriorMoments {
  Eigen::MatrixXd H;  // p x p
  Eigen::MatrixXd f;  // q x p
  Eigen::VectorXd D;  // q diagonal entries of the fixed conditional precision
  Eigen::MatrixXd L;  // p x p lower Cholesky factor of H

  Eigen::Index p() const { return H.rows(); }
  Eigen::Index q() const { return f.rows(); }
};

// Averages the per-draw cross products over positionally paired draws. The
// products beta' Sigma_x and mu_r mu_x' are formed per draw and then
// averaged; a product of averages is not the same quantity.
inline PosteriorMoments accumulate_moments(const std::vector<ConditionalDraw>& conditional,
                                           const std::vector<FactorDraw>& factor,
                                           const DPolicy& d_policy) {
  if (conditional.size() != factor.size())
    throw pairing_error("accumulate_moments: draw lists differ in length (" +
                        std::to_string(conditional.size()) + " vs " +
                        std::to_string(factor.size()) + ")");
  const std::size_t n = conditional.size();
  if (n < 2)
    throw pairing_error("accumulate_moments: need at least 2 paired draws for covariance terms");

  const Eigen::Index p = factor.front().mu_x.size();
  const Eigen::Index q = conditional.front().beta.cols();

  PosteriorMoments m;
  m.H = Eigen::MatrixXd::Zero(p, p);
  m.f = Eigen::MatrixXd::Zero(q, p);
  Eigen::VectorXd psi_bar = Eigen::VectorXd::Zero(q);
  for (std::size_t d = 0; d < n; ++d) {
    const FactorDraw& fx = factor[d];
    const ConditionalDraw& cd = conditional[d];
    if (fx.mu_x.size() != p || cd.beta.cols() != q || cd.beta.rows() != p)
      throw pairing_error("accumulate_moments: inconsistent draw dimensions at index " +
                          std::to_string(d));
    m.H.noalias() += fx.sigma_x + fx.mu_x * fx.mu_x.transpose();
    const Eigen::VectorXd mu_r = cd.beta.transpose() * fx.mu_x;  // q
    m.f.noalias() += cd.beta.transpose() * fx.sigma_x + mu_r * fx.mu_x.transpose();
    psi_bar += cd.psi_resid;
  }
  m.H /= static_cast<double>(n);
  m.f /= static_cast<double>(n);
  psi_bar /= static_cast<double>(n);

  switch (d_policy.kind) {
    case DPolicy::Kind::residual_precision:
      m.D = psi_bar.cwiseInverse();
      break;
    case DPolicy::Kind::identity:
      m.D = Eigen::VectorXd::Ones(q);
      break;
    case DPolicy::Kind::fixed:
      if (d_policy.fixed_d.size() != q)
        throw config_error("fixed D must have one entry per target column");
      if ((d_policy.fixed_d.array() <= 0).any())
        throw config_error("fixed D entries must be positive");
      m.D = d_policy.fixed_d;
      break;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(m.H);
  if (llt.info() != Eigen::Success) {
    Eigen::MatrixXd jittered = m.H;
    jittered.diagonal().array() += 1e-10 * m.H.trace() / static_cast<double>(p);
    llt.compute(jittered);
    if (llt.info() != Eigen::Success)
      throw numerical_error("accumulate_moments: H not positive definite even after jitter");
    m.H = jittered;
  }
  m.L = llt.matrixL();
  return m;
}

// Integrated conditional loss L(action) = -1/2 tr(D a H a') + tr(D f a').
inline double loss_value(const Eigen::MatrixXd& action, const PosteriorMoments& m) {
  if (action.rows() != m.q() || action.cols() != m.p())
    throw config_error("loss_value: action must be q x p");
  const Eigen::MatrixXd aH = action * m.H;
  double quad = 0.0, lin = 0.0;
  for (Eigen::Index i = 0; i < m.q(); ++i) {
    quad += m.D[i] * aH.row(i).dot(action.row(i));
    lin += m.D[i] * m.f.row(i).dot(action.row(i));
  }
  return -0.5 * quad + lin;
}

// Pre-integration loss at one paired draw's parameters (mu_r = beta' mu_x):
//   -1/2 tr(D a Sigma_x a') - 1/2 mu_x' a' D a mu_x
//   + tr(D beta' Sigma_x a') + mu_x' a' D mu_r.
inline double loss_value_per_draw(const Eigen::MatrixXd& action, const ConditionalDraw& cond,
                                  const FactorDraw& fact, const Eigen::VectorXd& D) {
  const Eigen::Index q = action.rows();
  if (D.size() != q) throw config_error("loss_value_per_draw: D must be length q");
  const Eigen::MatrixXd aS = action * fact.sigma_x;         // q x p
  const Eigen::VectorXd amu = action * fact.mu_x;           // q
  const Eigen::VectorXd mu_r = cond.beta.transpose() * fact.mu_x;
  const Eigen::MatrixXd bS = cond.beta.transpose() * fact.sigma_x;  // q x p
  double v = 0.0;
  for (Eigen::Index i = 0; i < q; ++i) {
    v += -0.5 * D[i] * aS.row(i).dot(action.row(i));
    v += -0.5 * D[i] * amu[i] * amu[i];
    v += D[i] * bS.row(i).dot(action.row(i));
    v += D[i] * amu[i] * mu_r[i];
  }
  return v;
}

}  // namespace etfsel

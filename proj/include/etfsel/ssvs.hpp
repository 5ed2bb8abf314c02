#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/returns_panel.hpp"
#include "etfsel/rng.hpp"

namespace etfsel {

// Binary inclusion vector identifying one candidate model.
struct ModelIndicator {
  std::vector<std::uint8_t> gamma;
  int k = 0;  // number of ones

  static ModelIndicator empty(int p) {
    ModelIndicator m;
    m.gamma.assign(static_cast<std::size_t>(p), 0);
    m.k = 0;
    return m;
  }

  int p() const { return static_cast<int>(gamma.size()); }

  void set(int i, bool on) {
    if (gamma[static_cast<std::size_t>(i)] != static_cast<std::uint8_t>(on)) {
      gamma[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(on);
      k += on ? 1 : -1;
    }
  }

  std::vector<int> selected() const {
    std::vector<int> idx;
    for (int i = 0; i < p(); ++i)
      if (gamma[static_cast<std::size_t>(i)]) idx.push_back(i);
    return idx;
  }

  std::string bitstring() const {
    std::string s(gamma.size(), '0');
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (gamma[i]) s[i] = '1';
    return s;
  }

  bool operator==(const ModelIndicator& o) const { return gamma == o.gamma; }
};

struct ModelPrior {
  enum class Kind { uniform, multiplicity_adjusted };
  Kind kind = Kind::multiplicity_adjusted;
};

struct GPolicy {
  enum class Kind { empirical_bayes, fixed };
  Kind kind = Kind::empirical_bayes;
  double fixed_g = 0.0;

  static GPolicy empirical_bayes() { return {Kind::empirical_bayes, 0.0}; }
  static GPolicy fixed(double g) { return {Kind::fixed, g}; }
};

// Per-column pieces of the model-vs-null Bayes factor.
struct BayesFactorParts {
  Eigen::VectorXd per_column_log_bf;  // q
  Eigen::VectorXd g_values;           // q
  Eigen::VectorXd sse_gamma;          // q
  Eigen::VectorXd sse_null;           // q

  double total() const { return per_column_log_bf.sum(); }
};

// One joint draw of the conditional-model parameters.
struct ConditionalDraw {
  ModelIndicator gamma;
  Eigen::MatrixXd beta;       // p x q, rows outside gamma exactly zero
  Eigen::VectorXd sigma;      // q, per-column residual scale
  Eigen::VectorXd psi_resid;  // q, per-column residual variance (sigma^2)
};

// Centered sufficient statistics shared by every model evaluation on a
// dataset: gram = Xc'Xc, cross = Xc'Rc, tss_i = ||Rc_i||^2 (the null SSE).
struct RegressionGram {
  Eigen::MatrixXd gram;   // p x p
  Eigen::MatrixXd cross;  // p x q
  Eigen::VectorXd tss;    // q
  int T = 0;
  std::vector<std::string> candidate_labels;
  std::vector<std::string> target_labels;

  int p() const { return static_cast<int>(gram.rows()); }
  int q() const { return static_cast<int>(tss.size()); }

  explicit RegressionGram(const AlignedData& data) {
    const Eigen::MatrixXd Xc =
        data.candidates.values.rowwise() - data.candidates.values.colwise().mean();
    const Eigen::MatrixXd Rc =
        data.targets.values.rowwise() - data.targets.values.colwise().mean();
    gram = Xc.transpose() * Xc;
    cross = Xc.transpose() * Rc;
    tss = Rc.colwise().squaredNorm();
    T = static_cast<int>(data.T());
    candidate_labels = data.candidates.labels;
    target_labels = data.targets.labels;
    for (int i = 0; i < q(); ++i)
      if (tss[i] <= 1e-300)
        throw validation_error("target column '" + target_labels[static_cast<std::size_t>(i)] +
                               "' is constant (zero total sum of squares)");
  }
};

// Local empirical-Bayes g: max{F - 1, 0} with F the regression F-statistic.
inline double empirical_bayes_g(double r_squared, int T, int k) {
  if (T - 1 - k <= 0)
    throw config_error("empirical_bayes_g: nonpositive degrees of freedom T-1-k");
  if (k <= 0) throw config_error("empirical_bayes_g: k must be positive");
  const double F = (r_squared / k) / ((1.0 - r_squared) / (T - 1 - k));
  return std::max(F - 1.0, 0.0);
}

namespace detail {

inline std::string selected_label_list(const ModelIndicator& m,
                                       const std::vector<std::string>& labels) {
  std::string s;
  for (int i : m.selected()) {
    if (!s.empty()) s += ",";
    s += labels.empty() ? std::to_string(i) : labels[static_cast<std::size_t>(i)];
  }
  return s;
}

// Cholesky of the selected sub-gram; throws singularity_error when the
// selected columns are numerically dependent.
inline Eigen::LLT<Eigen::MatrixXd> selected_llt(const ModelIndicator& gamma,
                                                const RegressionGram& data,
                                                Eigen::MatrixXd* sub_cross) {
  const std::vector<int> idx = gamma.selected();
  const int k = static_cast<int>(idx.size());
  Eigen::MatrixXd G(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) G(a, b) = data.gram(idx[static_cast<std::size_t>(a)],
                                                    idx[static_cast<std::size_t>(b)]);
  if (sub_cross) {
    sub_cross->resize(k, data.q());
    for (int a = 0; a < k; ++a)
      sub_cross->row(a) = data.cross.row(idx[static_cast<std::size_t>(a)]);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw singularity_error("selected design is rank deficient: columns {" +
                            selected_label_list(gamma, data.candidate_labels) + "}");
  // LLT can succeed on near-singular matrices; reject collapsed pivots too
  const double dmax = G.diagonal().maxCoeff();
  for (int a = 0; a < k; ++a)
    if (llt.matrixLLT()(a, a) * llt.matrixLLT()(a, a) <= 1e-12 * dmax)
      throw singularity_error("selected design is numerically singular: columns {" +
                              selected_label_list(gamma, data.candidate_labels) + "}");
  return llt;
}

}  // namespace detail

// Log Bayes factor of model gamma against the null model, per target column:
//   log B_i = ((T-k-1)/2) log(1+g) - ((T+1)/2) log(1 + g SSE_g/SSE_0)
// with SSE from the centered least-squares fit and g per column and model.
inline BayesFactorParts log_bayes_factor(const ModelIndicator& gamma, const RegressionGram& data,
                                         const GPolicy& g_policy) {
  const int q = data.q();
  const int T = data.T;
  const int k = gamma.k;
  BayesFactorParts parts;
  parts.per_column_log_bf = Eigen::VectorXd::Zero(q);
  parts.g_values = Eigen::VectorXd::Zero(q);
  parts.sse_gamma = data.tss;
  parts.sse_null = data.tss;
  if (k == 0) return parts;  // B_00 = 1 by definition

  if (T - 1 - k <= 0)
    throw config_error("log_bayes_factor: model size k=" + std::to_string(k) +
                       " leaves no residual degrees of freedom");

  Eigen::MatrixXd sub_cross;
  const auto llt = detail::selected_llt(gamma, data, &sub_cross);
  // fitted sum of squares per column: m' G^{-1} m
  const Eigen::MatrixXd solved = llt.solve(sub_cross);
  for (int i = 0; i < q; ++i) {
    const double fit = sub_cross.col(i).dot(solved.col(i));
    double sse = data.tss[i] - fit;
    sse = std::max(sse, 1e-12 * data.tss[i]);  // guard exact-fit cancellation
    const double ratio = sse / data.tss[i];
    double g = 0.0;
    if (g_policy.kind == GPolicy::Kind::fixed) {
      g = g_policy.fixed_g;
      if (g < 0.0) throw config_error("fixed g must be nonnegative");
    } else {
      g = empirical_bayes_g(1.0 - ratio, T, k);
    }
    parts.sse_gamma[i] = sse;
    parts.g_values[i] = g;
    parts.per_column_log_bf[i] =
        0.5 * (T - k - 1) * std::log1p(g) - 0.5 * (T + 1) * std::log1p(g * ratio);
  }
  return parts;
}

// Uniform: every model gets -p log 2. Multiplicity-adjusted: equal mass on
// each model size, -log(p+1) - log C(p, k).
inline double log_model_prior(const ModelIndicator& gamma, const ModelPrior& prior, int p) {
  if (prior.kind == ModelPrior::Kind::uniform) return -p * std::log(2.0);
  const int k = gamma.k;
  double log_choose = 0.0;  // log C(p, k)
  for (int j = 0; j < k; ++j)
    log_choose += std::log(static_cast<double>(p - j)) - std::log(static_cast<double>(j + 1));
  return -std::log(static_cast<double>(p + 1)) - log_choose;
}

// One Gibbs sweep over all coordinates. Each coordinate is flipped to 1 with
// probability B_a0 P(M_a) / (B_a0 P(M_a) + B_b0 P(M_b)), evaluated in log
// space. A singular candidate design skips the flip with a warning.
inline ModelIndicator gibbs_sweep(ModelIndicator state, const RegressionGram& data,
                                  const ModelPrior& prior, const GPolicy& g_policy, Rng& rng,
                                  bool shuffle_coords = false) {
  const int p = data.p();
  std::vector<int> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), 0);
  if (shuffle_coords) rng.shuffle(order);

  for (int i : order) {
    ModelIndicator with = state, without = state;
    with.set(i, true);
    without.set(i, false);
    double log_a, log_b;
    try {
      log_a = log_bayes_factor(with, data, g_policy).total() + log_model_prior(with, prior, p);
      log_b =
          log_bayes_factor(without, data, g_policy).total() + log_model_prior(without, prior, p);
    } catch (const singularity_error& e) {
      warn(std::string("gibbs_sweep: ") + e.what() + "; keeping coordinate " +
           std::to_string(i) + " unchanged");
      continue;
    }
    // p_i = exp(log_a) / (exp(log_a) + exp(log_b)), stably
    const double d = log_b - log_a;
    const double p_i = d > 0.0 ? std::exp(-d) / (1.0 + std::exp(-d)) : 1.0 / (1.0 + std::exp(d));
    state.set(i, rng.uniform() <= p_i);
  }
  return state;
}

// Closed-form posterior draw of (beta, sigma) given the model. Per target
// column: sigma^2 ~ InvGamma((T-1)/2, SSR_g/2) with
// SSR_g = TSS - g/(1+g) (TSS - SSE), then beta | sigma^2 normal with mean
// (g/(1+g)) beta_ols and covariance (g/(1+g)) sigma^2 (Xc'Xc)^{-1}.
inline ConditionalDraw sample_beta_sigma(const ModelIndicator& gamma, const RegressionGram& data,
                                         const Eigen::VectorXd& g_values, Rng& rng) {
  const int q = data.q();
  const int p = data.p();
  const int k = gamma.k;
  if (g_values.size() != q)
    throw config_error("sample_beta_sigma: need one g per target column");

  ConditionalDraw draw;
  draw.gamma = gamma;
  draw.beta = Eigen::MatrixXd::Zero(p, q);
  draw.sigma.resize(q);
  draw.psi_resid.resize(q);

  Eigen::MatrixXd sub_cross;
  Eigen::MatrixXd beta_ols;  // k x q
  Eigen::MatrixXd llt_matrix;
  if (k > 0) {
    const auto llt = detail::selected_llt(gamma, data, &sub_cross);
    beta_ols = llt.solve(sub_cross);
    llt_matrix = llt.matrixL();
  }
  const std::vector<int> idx = gamma.selected();

  for (int i = 0; i < q; ++i) {
    const double tss = data.tss[i];
    double sse = tss;
    if (k > 0) sse = std::max(tss - sub_cross.col(i).dot(beta_ols.col(i)), 1e-12 * tss);
    const double g = k > 0 ? g_values[i] : 0.0;
    const double shrink = g / (1.0 + g);
    const double ssr_g = tss - shrink * (tss - sse);
    const double sigma2 = rng.inverse_gamma(0.5 * (data.T - 1), 0.5 * ssr_g);
    draw.psi_resid[i] = sigma2;
    draw.sigma[i] = std::sqrt(sigma2);

    if (k == 0 || shrink == 0.0) continue;  // beta degenerate at zero when g = 0
    Eigen::VectorXd z(k);
    for (int a = 0; a < k; ++a) z[a] = rng.normal();
    // beta = shrink*beta_ols + sqrt(shrink*sigma2) L^{-T} z
    Eigen::VectorXd b = llt_matrix.triangularView<Eigen::Lower>().transpose().solve(z);
    b = shrink * beta_ols.col(i) + std::sqrt(shrink * sigma2) * b;
    for (int a = 0; a < k; ++a) draw.beta(idx[static_cast<std::size_t>(a)], i) = b[a];
  }
  return draw;
}

struct ChainConfig {
  int n_sweeps = 10000;
  int n_burn = 2000;
  int thin = 5;
  std::uint64_t seed = 1;
  ModelPrior prior;
  GPolicy g_policy = GPolicy::empirical_bayes();
  bool shuffle_coords = false;
  bool sample_parameters = true;  // draw (beta, sigma) at retained sweeps
};

struct ChainResult {
  std::vector<ConditionalDraw> draws;
  std::vector<ModelIndicator> visited;  // retained sweeps' indicators
  Eigen::VectorXd inclusion;            // p, retained-sweep frequency of gamma_j = 1
  std::vector<std::string> candidate_labels;
  std::vector<std::string> target_labels;
};

inline ChainResult run_chain(const RegressionGram& data, const ChainConfig& cfg) {
  if (cfg.n_burn < 0 || cfg.n_sweeps <= cfg.n_burn)
    throw config_error("run_chain: need n_sweeps > n_burn >= 0 (empty chain otherwise)");
  if (cfg.thin < 1) throw config_error("run_chain: thin must be >= 1");

  Rng rng(cfg.seed);
  ModelIndicator state = ModelIndicator::empty(data.p());
  ChainResult out;
  out.candidate_labels = data.candidate_labels;
  out.target_labels = data.target_labels;
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(data.p());
  int retained = 0;

  for (int sweep = 0; sweep < cfg.n_sweeps; ++sweep) {
    state = gibbs_sweep(state, data, cfg.prior, cfg.g_policy, rng, cfg.shuffle_coords);
    if (sweep < cfg.n_burn || (sweep - cfg.n_burn) % cfg.thin != 0) continue;
    ++retained;
    out.visited.push_back(state);
    for (int j = 0; j < data.p(); ++j) counts[j] += state.gamma[static_cast<std::size_t>(j)];
    if (cfg.sample_parameters) {
      const BayesFactorParts parts = log_bayes_factor(state, data, cfg.g_policy);
      out.draws.push_back(sample_beta_sigma(state, data, parts.g_values, rng));
    }
  }
  out.inclusion = counts / retained;
  return out;
}

inline ChainResult run_chain(const AlignedData& data, const ChainConfig& cfg) {
  return run_chain(RegressionGram(data), cfg);
}

// Exhaustive model posterior for small p: P(M | R) over all 2^p models.
// This is the enumeration the Gibbs chain must agree with in distribution.
struct EnumeratedPosterior {
  std::vector<ModelIndicator> models;
  Eigen::VectorXd probabilities;
  Eigen::VectorXd inclusion;  // p
};

inline EnumeratedPosterior exhaustive_posterior(const RegressionGram& data,
                                                const ModelPrior& prior,
                                                const GPolicy& g_policy) {
  const int p = data.p();
  if (p > 20) throw config_error("exhaustive_posterior: p too large to enumerate");
  const std::size_t n_models = std::size_t{1} << p;
  EnumeratedPosterior out;
  Eigen::VectorXd logs(static_cast<Eigen::Index>(n_models));
  for (std::size_t m = 0; m < n_models; ++m) {
    ModelIndicator ind = ModelIndicator::empty(p);
    for (int j = 0; j < p; ++j)
      if (m & (std::size_t{1} << j)) ind.set(j, true);
    logs[static_cast<Eigen::Index>(m)] =
        log_bayes_factor(ind, data, g_policy).total() + log_model_prior(ind, prior, p);
    out.models.push_back(std::move(ind));
  }
  const double mx = logs.maxCoeff();
  Eigen::VectorXd w = (logs.array() - mx).exp();
  out.probabilities = w / w.sum();
  out.inclusion = Eigen::VectorXd::Zero(p);
  for (std::size_t m = 0; m < n_models; ++m)
    for (int j = 0; j < p; ++j)
      if (out.models[m].gamma[static_cast<std::size_t>(j)])
        out.inclusion[j] += out.probabilities[static_cast<Eigen::Index>(m)];
  return out;
}

}  // namespace etfsel

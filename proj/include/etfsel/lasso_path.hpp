#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "etfsel/errors.hpp"
#include "etfsel/moments.hpp"

namespace etfsel {

// Conditional-regression summary being sparsified (q x p). Not the binary
// model indicator, despite sharing its symbol upstream.
struct ActionMatrix {
  Eigen::MatrixXd gamma;  // q x p
  int nnz = 0;

  static ActionMatrix from(Eigen::MatrixXd g) {
    ActionMatrix a;
    a.nnz = static_cast<int>((g.array() != 0.0).count());
    a.gamma = std::move(g);
    return a;
  }
};

struct LossPath {
  Eigen::VectorXd lambdas;                 // strictly decreasing grid
  std::vector<ActionMatrix> actions;       // one per grid point
  std::vector<Eigen::VectorXd> loss_draws; // per grid point, one loss per draw
  std::vector<int> model_sizes;            // edge counts (|entry| > threshold)
};

// Weighted-lasso reformulation of the integrated loss. Minimizing
//   1/2 || (L' (x) I) vec(gt) - vec(W) ||^2 + lambda ||w .* vec(gt)||_1
// over gt = D^{1/2} gamma, with W = D^{1/2} f L^{-T}, is equivalent to
// maximizing the penalized loss. The Kronecker design is never materialized:
// coordinate (i,m) of gt has column squared norm H(m,m) and its residual
// correlation is a length-p dot product against row m of L.
class KroneckerLasso {
 public:
  explicit KroneckerLasso(const PosteriorMoments& m)
      : L_(m.L), sqrt_d_(m.D.array().sqrt()), q_(m.q()), p_(m.p()) {
    // W = D^{1/2} f L^{-T}: solve W L' = D^{1/2} f
    W_ = sqrt_d_.asDiagonal() * m.f;
    L_.transpose().triangularView<Eigen::Upper>().solveInPlace<Eigen::OnTheRight>(W_);
    col_sq_norm_ = m.H.diagonal();
    if ((col_sq_norm_.array() <= 0).any())
      throw singularity_error("lasso design has a zero column (H diagonal entry <= 0)");
  }

  Eigen::Index p() const { return p_; }
  Eigen::Index q() const { return q_; }

  // Explicit design/response, for small problems and oracle checks only.
  Eigen::MatrixXd dense_design() const {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(p_ * q_, p_ * q_);
    for (Eigen::Index m = 0; m < p_; ++m)      // gt column
      for (Eigen::Index c = 0; c < p_; ++c)    // residual column
        for (Eigen::Index i = 0; i < q_; ++i)  // gt/residual row
          G(c * q_ + i, m * q_ + i) = L_(m, c);
    return G;
  }
  Eigen::VectorXd dense_response() const {
    return Eigen::Map<const Eigen::VectorXd>(W_.data(), W_.size());
  }

  // Coordinate descent at one lambda, warm-started from gt. weights is q x p,
  // nonnegative; a zero weight leaves that coordinate unpenalized.
  void solve(double lambda, const Eigen::MatrixXd& weights, Eigen::MatrixXd& gt,
             double tol = 1e-11, int max_passes = 100000) const {
    Eigen::MatrixXd resid = W_ - gt * L_;
    for (int pass = 0; pass < max_passes; ++pass) {
      double max_delta = 0.0;
      for (Eigen::Index mcol = 0; mcol < p_; ++mcol) {
        for (Eigen::Index i = 0; i < q_; ++i) {
          const double a = col_sq_norm_[mcol];
          const double corr = resid.row(i).dot(L_.row(mcol));
          const double z = gt(i, mcol) + corr / a;
          const double pen = lambda * weights(i, mcol) / a;
          double v = z;
          if (pen > 0.0) {
            const double mag = std::abs(z) - pen;
            v = mag > 0.0 ? (z > 0.0 ? mag : -mag) : 0.0;
          }
          const double delta = v - gt(i, mcol);
          if (delta != 0.0) {
            gt(i, mcol) = v;
            resid.row(i) -= delta * L_.row(mcol);
            max_delta = std::max(max_delta, std::abs(delta) * std::sqrt(a));
          }
        }
      }
      if (max_delta <= tol) return;
    }
    warn("kronecker lasso: coordinate descent hit max_passes before tolerance");
  }

  // Penalized objective value at gt (for monotonicity checks).
  double objective(double lambda, const Eigen::MatrixXd& weights,
                   const Eigen::MatrixXd& gt) const {
    const double fit = 0.5 * (gt * L_ - W_).squaredNorm();
    return fit + lambda * (weights.array() * gt.array().abs()).sum();
  }

  // Smallest lambda at which every weighted coordinate is zero, given the
  // unpenalized coordinates are at their restricted least-squares values.
  double lambda_max(const Eigen::MatrixXd& weights, Eigen::MatrixXd* base = nullptr) const {
    Eigen::MatrixXd gt0 = Eigen::MatrixXd::Zero(q_, p_);
    if ((weights.array() == 0.0).any()) {
      // freeze weighted coordinates at zero via an effectively infinite lambda
      solve(std::numeric_limits<double>::max(), weights, gt0);
    }
    const Eigen::MatrixXd resid = W_ - gt0 * L_;
    double lam = 0.0;
    for (Eigen::Index mcol = 0; mcol < p_; ++mcol)
      for (Eigen::Index i = 0; i < q_; ++i)
        if (weights(i, mcol) > 0.0)
          lam = std::max(lam, std::abs(resid.row(i).dot(L_.row(mcol))) / weights(i, mcol));
    if (base) *base = gt0;
    return lam;
  }

  // Map the rescaled solution back to the action: gamma = D^{-1/2} gt.
  Eigen::MatrixXd to_action(const Eigen::MatrixXd& gt) const {
    return sqrt_d_.cwiseInverse().asDiagonal() * gt;
  }

 private:
  Eigen::MatrixXd L_;            // p x p lower Cholesky of H
  Eigen::MatrixXd W_;            // q x p response matrix
  Eigen::VectorXd sqrt_d_;       // q
  Eigen::VectorXd col_sq_norm_;  // p, H diagonal
  Eigen::Index q_, p_;
};

inline KroneckerLasso build_lasso_problem(const PosteriorMoments& m) {
  return KroneckerLasso(m);
}

struct PathConfig {
  int grid_size = 100;
  double lambda_min_ratio = 1e-4;
  double edge_threshold = 1e-8;
  double cd_tol = 1e-11;
};

// Traces the weighted-lasso solution path on a geometric lambda grid with
// warm starts, evaluating the per-draw conditional loss at every point.
inline LossPath solution_path(const PosteriorMoments& moments,
                              const std::vector<ConditionalDraw>& conditional,
                              const std::vector<FactorDraw>& factor,
                              const Eigen::MatrixXd& penalty_weights, const PathConfig& cfg) {
  if (penalty_weights.rows() != moments.q() || penalty_weights.cols() != moments.p())
    throw config_error("solution_path: penalty weights must be q x p");
  if ((penalty_weights.array() < 0).any())
    throw config_error("solution_path: penalty weights must be nonnegative");
  if (conditional.size() != factor.size())
    throw pairing_error("solution_path: draw lists differ in length");

  const KroneckerLasso lasso(moments);

  std::vector<double> grid;
  Eigen::MatrixXd gt;
  if ((penalty_weights.array() == 0.0).all()) {
    warn("solution_path: all penalty weights are zero; path degenerates to one dense point");
    grid.assign(1, 0.0);
    gt = Eigen::MatrixXd::Zero(moments.q(), moments.p());
  } else {
    if (cfg.grid_size < 2) throw config_error("solution_path: grid size must be >= 2");
    const double lam_max = lasso.lambda_max(penalty_weights, &gt) * (1.0 + 1e-12);
    const double lam_min = lam_max * cfg.lambda_min_ratio;
    const double step = std::log(lam_min / lam_max) / (cfg.grid_size - 1);
    for (int i = 0; i < cfg.grid_size; ++i) grid.push_back(lam_max * std::exp(step * i));
  }

  LossPath path;
  path.lambdas.resize(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    lasso.solve(grid[gi], penalty_weights, gt, cfg.cd_tol);
    Eigen::MatrixXd action = lasso.to_action(gt);
    path.lambdas[static_cast<Eigen::Index>(gi)] = grid[gi];
    path.model_sizes.push_back(
        static_cast<int>((action.array().abs() > cfg.edge_threshold).count()));
    Eigen::VectorXd losses(static_cast<Eigen::Index>(conditional.size()));
    for (std::size_t d = 0; d < conditional.size(); ++d)
      losses[static_cast<Eigen::Index>(d)] =
          loss_value_per_draw(action, conditional[d], factor[d], moments.D);
    path.loss_draws.push_back(std::move(losses));
    path.actions.push_back(ActionMatrix::from(std::move(action)));
  }
  return path;
}

}  // namespace etfsel

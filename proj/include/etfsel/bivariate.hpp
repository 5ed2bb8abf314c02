#pragma once

#include <cmath>
#include <vector>

#include "etfsel/errors.hpp"

namespace etfsel {

// Posterior-mean covariance entries of the bivariate model
// Sigma = [[a, c], [c, b]] used by the closed-form comparisons.
struct BivariateParams {
  double a_bar;
  double b_bar;
  double c_bar;

  double det() const { return a_bar * b_bar - c_bar * c_bar; }

  void validate() const {
    if (!(a_bar > 0.0) || !(b_bar > 0.0) || !(det() > 0.0))
      throw validation_error("bivariate params must form a positive-definite covariance");
  }
};

// Argmax of the penalized conditional loss lambda|g| - g^2 b/2 + g c:
// soft threshold, sign(c) max(|c| - lambda, 0) / b.
inline double conditional_loss_optimum(const BivariateParams& params, double lambda) {
  params.validate();
  if (lambda < 0.0) throw config_error("penalty must be nonnegative");
  const double mag = std::abs(params.c_bar) - lambda;
  if (mag <= 0.0) return 0.0;
  return (params.c_bar > 0.0 ? mag : -mag) / params.b_bar;
}

struct GlassoSolution {
  double g_star;
  double gamma_implied;  // -g* det(Sigma), comparable to the conditional action
};

// Closed-form minimizer of the off-diagonal-penalized glasso objective
//   rho|g| - log(psi kappa - g^2) + a psi + b kappa + 2 c g.
// The precision off-diagonal opposes c in sign; the solution reaches zero at
// rho = 2|c|.
inline GlassoSolution glasso_optimum(const BivariateParams& params, double rho) {
  params.validate();
  if (rho < 0.0) throw config_error("penalty must be nonnegative");
  const double c = params.c_bar;
  if (rho >= 2.0 * std::abs(c)) return {0.0, 0.0};
  const double det = params.det();
  const double den = c >= 0.0 ? det + c * rho - 0.25 * rho * rho
                              : det - c * rho - 0.25 * rho * rho;
  if (std::abs(den) < 1e-12)
    throw singularity_error("glasso solution path: vanishing denominator");
  const double g = (c >= 0.0 ? 0.5 * rho - c : -0.5 * rho - c) / den;
  return {g, -g * det};
}

struct GlassoDiagonals {
  double kappa;
  double psi;
};

// Stationary diagonal entries given the off-diagonal g (positive roots):
// kappa = (1 + sqrt(1 + 4 a b g^2)) / (2b), psi = (b/a) kappa.
inline GlassoDiagonals glasso_stationary_diagonals(const BivariateParams& params, double g) {
  params.validate();
  const double s = std::sqrt(1.0 + 4.0 * params.a_bar * params.b_bar * g * g);
  const double kappa = (1.0 + s) / (2.0 * params.b_bar);
  return {kappa, (params.b_bar / params.a_bar) * kappa};
}

struct PathComparisonRow {
  double t;                  // shared penalty fraction in [0,1]
  double gamma_conditional;  // lambda = t |c|
  double gamma_glasso;       // rho = 2 t |c|
};

// Both solution paths on a shared axis: t = 1 is the zero-crossing for each
// penalty (lambda = |c|, rho = 2|c|), t = 0 the unpenalized solutions.
inline std::vector<PathComparisonRow> path_comparison_table(const BivariateParams& params,
                                                            int grid_size) {
  params.validate();
  if (grid_size < 2) throw config_error("path comparison needs at least 2 grid points");
  std::vector<PathComparisonRow> rows;
  rows.reserve(static_cast<std::size_t>(grid_size));
  const double cmag = std::abs(params.c_bar);
  for (int i = 0; i < grid_size; ++i) {
    const double t = static_cast<double>(i) / (grid_size - 1);
    rows.push_back({t, conditional_loss_optimum(params, t * cmag),
                    glasso_optimum(params, 2.0 * t * cmag).gamma_implied});
  }
  return rows;
}

}  // namespace etfsel

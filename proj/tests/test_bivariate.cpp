#include <catch2/catch_amalgamated.hpp>

#include "etfsel/bivariate.hpp"
#include "etfsel/rng.hpp"
#include "oracles.hpp"

using namespace etfsel;

TEST_CASE("conditional loss optimum closed form") {
  const BivariateParams demo{12.0, 1.0, 3.0};
  CHECK(conditional_loss_optimum(demo, 0.0) == Catch::Approx(3.0).margin(1e-15));
  CHECK(conditional_loss_optimum(demo, 3.0) == 0.0);     // lambda = c zero-crossing
  CHECK(conditional_loss_optimum(demo, 5.0) == 0.0);
  CHECK(conditional_loss_optimum(demo, 1.0) == Catch::Approx(2.0));

  const BivariateParams neg{4.0, 2.0, -1.5};
  CHECK(conditional_loss_optimum(neg, 0.0) == Catch::Approx(-0.75));
  CHECK(conditional_loss_optimum(neg, 1.5) == 0.0);
  CHECK_THROWS_AS(conditional_loss_optimum(BivariateParams{1.0, 1.0, 2.0}, 0.0),
                  validation_error);
}

TEST_CASE("conditional loss optimum is the argmax (golden-section oracle)") {
  Rng rng(11);
  for (int rep = 0; rep < 1000; ++rep) {
    const double b = 0.2 + 2.0 * rng.uniform();
    const double a = 0.2 + 5.0 * rng.uniform();
    const double cmax = std::sqrt(a * b);
    const double c = (2.0 * rng.uniform() - 1.0) * 0.95 * cmax;
    const BivariateParams params{a, b, c};
    const double lambda = 1.5 * std::abs(c) * rng.uniform();
    auto loss = [&](double g) { return -lambda * std::abs(g) - 0.5 * g * g * b + g * c; };
    const double span = 3.0 * (std::abs(c) / b + 1.0);
    const double numeric = oracle::golden_max(loss, -span, span, 1e-12);
    CHECK(std::abs(conditional_loss_optimum(params, lambda) - numeric) < 1e-8);
  }
}

TEST_CASE("glasso closed form: paper demonstration values") {
  const BivariateParams demo{12.0, 1.0, 3.0};
  SECTION("unpenalized solution recovers c") {
    const GlassoSolution s = glasso_optimum(demo, 0.0);
    CHECK(s.gamma_implied == Catch::Approx(3.0).margin(1e-12));
    CHECK(s.g_star == Catch::Approx(-1.0).margin(1e-12));  // -c/det = -3/3
  }
  SECTION("zero crossing at rho = 2c") {
    const GlassoSolution s = glasso_optimum(demo, 6.0);
    CHECK(s.g_star == 0.0);
    CHECK(s.gamma_implied == 0.0);
  }
  SECTION("frozen value at rho = 1") {
    const GlassoSolution s = glasso_optimum(demo, 1.0);
    CHECK(s.g_star == Catch::Approx(-0.43478260869565216).margin(1e-12));
    CHECK(s.gamma_implied == Catch::Approx(1.3043478260869565).margin(1e-12));
  }
  SECTION("sign opposition for negative c") {
    const BivariateParams neg{12.0, 1.0, -3.0};
    const GlassoSolution s = glasso_optimum(neg, 0.0);
    CHECK(s.g_star == Catch::Approx(1.0).margin(1e-12));
    CHECK(s.gamma_implied == Catch::Approx(-3.0).margin(1e-12));
  }
}

TEST_CASE("glasso closed form matches the numeric minimizer") {
  const BivariateParams demo{12.0, 1.0, 3.0};
  for (double rho : {0.0, 0.5, 1.0, 2.0, 3.5, 5.0, 5.9}) {
    const GlassoSolution s = glasso_optimum(demo, rho);
    const oracle::GlassoNumeric n = oracle::glasso_numeric_min(12.0, 1.0, 3.0, rho);
    CHECK(std::abs(s.g_star - n.g) < 1e-6);
  }
}

TEST_CASE("glasso stationary diagonals satisfy all first-order conditions") {
  const BivariateParams demo{12.0, 1.0, 3.0};
  SECTION("g = 0 inverts a diagonal covariance") {
    const GlassoDiagonals d = glasso_stationary_diagonals(demo, 0.0);
    CHECK(d.kappa == Catch::Approx(1.0).margin(1e-15));       // 1/b
    CHECK(d.psi == Catch::Approx(1.0 / 12.0).margin(1e-15));  // 1/a
  }
  SECTION("FOC residuals vanish along the path") {
    for (double rho : {0.0, 0.5, 1.0, 2.5, 4.0, 5.5}) {
      const GlassoSolution s = glasso_optimum(demo, rho);
      const GlassoDiagonals d = glasso_stationary_diagonals(demo, s.g_star);
      const double det = d.psi * d.kappa - s.g_star * s.g_star;
      CHECK(std::abs(-d.kappa / det + demo.a_bar) < 1e-10);
      CHECK(std::abs(-d.psi / det + demo.b_bar) < 1e-10);
      if (s.g_star != 0.0) {
        const double sgn = s.g_star > 0 ? 1.0 : -1.0;
        CHECK(std::abs(sgn * rho + 2.0 * s.g_star / det + 2.0 * demo.c_bar) < 1e-10);
      }
    }
  }
  SECTION("kappa/psi keeps the fixed ratio a/b") {
    Rng rng(4);
    for (int rep = 0; rep < 50; ++rep) {
      const double g = 4.0 * (rng.uniform() - 0.5);
      const GlassoDiagonals d = glasso_stationary_diagonals(demo, g);
      CHECK(d.kappa / d.psi == Catch::Approx(demo.a_bar / demo.b_bar).margin(1e-10));
    }
  }
}

TEST_CASE("path comparison table endpoints and the large-a coincidence") {
  const BivariateParams demo{12.0, 1.0, 3.0};
  const auto rows = path_comparison_table(demo, 101);
  REQUIRE(rows.size() == 101);
  CHECK(rows.front().t == 0.0);
  CHECK(rows.front().gamma_conditional == Catch::Approx(3.0).margin(1e-12));
  CHECK(rows.front().gamma_glasso == Catch::Approx(3.0).margin(1e-12));
  CHECK(rows.back().t == 1.0);
  CHECK(rows.back().gamma_conditional == 0.0);
  CHECK(rows.back().gamma_glasso == 0.0);

  auto max_gap = [](const std::vector<PathComparisonRow>& r) {
    double m = 0.0;
    for (const auto& row : r) m = std::max(m, std::abs(row.gamma_conditional - row.gamma_glasso));
    return m;
  };
  const auto rows_wide = path_comparison_table(BivariateParams{200.0, 1.0, 3.0}, 101);
  CHECK(max_gap(rows_wide) < max_gap(rows));  // paths begin to coincide as a grows

  // both paths are continuous in t (no jumps between adjacent grid points)
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::abs(rows[i].gamma_conditional - rows[i - 1].gamma_conditional) < 0.1);
    CHECK(std::abs(rows[i].gamma_glasso - rows[i - 1].gamma_glasso) < 0.2);
  }
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlllab/costs.hpp"
#include "nlllab/error.hpp"
#include "nlllab/game_model.hpp"
#include "nlllab/nll_finite.hpp"

using namespace nlllab;

TEST(Builders, NearestNeighborConstants) {
  const GameSpec five = build_quadratic_nearest_neighbor(5, 0.0);
  EXPECT_EQ(five.m, 3);
  EXPECT_NEAR(five.gamma, 1.0 / (6.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_EQ(five.supports[0], (std::vector<State>{0, 1, 4}));

  const GameSpec two = build_quadratic_nearest_neighbor(2, 0.1);
  EXPECT_EQ(two.m, 2);
  EXPECT_DOUBLE_EQ(two.gamma, 0.25);
  EXPECT_EQ(two.supports[1], (std::vector<State>{0, 1}));

  QuadraticCouplings k;
  k.c = 2.0;
  k.kappa_g = 3.0;
  k.kappa_ell = 0.5;
  const GameSpec scaled = build_quadratic_nearest_neighbor(4, 0.0, k);
  EXPECT_NEAR(scaled.gamma, 2.0 / (6.0 * std::sqrt(3.0)), 1e-15);
  EXPECT_DOUBLE_EQ(scaled.lip_g, 1.5);
  EXPECT_DOUBLE_EQ(scaled.lip_ell, 0.25);
  EXPECT_DOUBLE_EQ(scaled.lip_dell, 0.0);

  EXPECT_THROW(build_quadratic_nearest_neighbor(1, 0.0), ConfigError);
}

TEST(GameSpec, ValidateRejectsBrokenSpecs) {
  GameSpec s = build_quadratic_nearest_neighbor(3, 0.0);
  s.gamma = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = build_quadratic_nearest_neighbor(3, 0.0);
  s.supports[0] = {0, 5};
  EXPECT_THROW(s.validate(), ConfigError);
  s = build_quadratic_nearest_neighbor(3, 0.0);
  s.sigma2 = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = build_quadratic_nearest_neighbor(3, 0.0);
  s.supports[1] = {2, 0, 2};
  s.validate();
  EXPECT_EQ(s.supports[1], (std::vector<State>{0, 2}));
}

TEST(TimeGrid, RejectsNonPositiveSteps) {
  EXPECT_THROW(TimeGrid(0.0, 3), ConfigError);
  EXPECT_THROW(TimeGrid(0.1, -1), ConfigError);
  const TimeGrid g(0.25, 4);
  EXPECT_DOUBLE_EQ(g.T(), 1.0);
  EXPECT_DOUBLE_EQ(g.time(3), 0.75);
}

TEST(AdmissibleSet, LowerBoundAndFeasibility) {
  const GameSpec s = build_quadratic_nearest_neighbor(2, 0.05);
  const AdmissibleSet a = admissible_set(s, 1.0, 0);
  EXPECT_EQ(a.support, (std::vector<State>{0, 1}));
  EXPECT_DOUBLE_EQ(a.lower_bound, 0.05);
  EXPECT_TRUE(a.contains(std::vector<double>{0.95, 0.05}));
  EXPECT_FALSE(a.contains(std::vector<double>{0.97, 0.03}));
  EXPECT_THROW(admissible_set(s, 11.0, 0), FeasibilityError);

  const GameSpec t = build_quadratic_nearest_neighbor(5, 0.1);
  const AdmissibleSet b = admissible_set(t, 0.5, 2);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(b.contains(b.random_point(rng)));
  for (const Vec& v : b.vertices()) EXPECT_TRUE(b.contains(v));
  EXPECT_DOUBLE_EQ(b.random_point(rng)[0], 0.0);
}

// ℓ(r') >= ℓ(r) + ∇ℓ(r)·(r' - r) + γ |r' - r|_1 |r' - r|_∞ over rate vectors
// with zero coordinate sum.
TEST(QuadraticCost, StrongConvexityAudit) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int d : {2, 3, 5}) {
    const GameSpec s = build_quadratic_nearest_neighbor(d, 0.0);
    const std::vector<double> mu(d, 1.0 / d);
    for (int t = 0; t < 1000; ++t) {
      const State x = static_cast<State>(t % d);
      Vec r(d, 0.0), q(d, 0.0);
      for (State y : s.supports[x]) {
        if (y == x) continue;
        r[y] = U(rng);
        q[y] = U(rng);
        r[x] -= r[y];
        q[x] -= q[y];
      }
      const Vec g = s.cost->running_subgrad(x, mu, r);
      double lin = 0.0, l1 = 0.0, linf = 0.0;
      for (int j = 0; j < d; ++j) {
        lin += g[j] * (q[j] - r[j]);
        l1 += std::abs(q[j] - r[j]);
        linf = std::max(linf, std::abs(q[j] - r[j]));
      }
      EXPECT_GE(s.cost->running(x, mu, q),
                s.cost->running(x, mu, r) + lin + s.gamma * l1 * linf - 1e-9);
    }
  }
}

TEST(Lipschitz, RecursionMatchesHandIteration) {
  const GameSpec s = build_quadratic_nearest_neighbor(3, 0.1, {1.0, 1.0, 0.4});
  const double h = 0.001;
  const auto L = lipschitz_recursion(s, h, 10);
  double l = s.m * s.lip_g;
  ASSERT_EQ(L.size(), 11u);
  EXPECT_DOUBLE_EQ(L[0], l);
  for (int k = 1; k <= 10; ++k) {
    l = l + h * (s.m * s.lip_ell + l * (s.lip_dell + l) / (s.gamma - h * l));
    EXPECT_NEAR(L[k], l, 1e-13);
  }
  const auto blown = lipschitz_recursion(s, 0.5, 5);
  EXPECT_TRUE(std::isinf(blown.back()));
}

TEST(Lipschitz, BudgetFields) {
  const GameSpec s = build_quadratic_nearest_neighbor(3, 0.1);
  const double h = 0.0025, M = 2.0;
  const LipschitzBudget b = lipschitz_budget(s, h, 200, 4, M);
  EXPECT_DOUBLE_EQ(b.h_star, s.gamma / M);
  const double mt = s.m * s.lip_ell + M * (s.lip_dell + M) / (s.gamma - h * M);
  EXPECT_NEAR(b.M_tilde, mt, 1e-12);
  EXPECT_NEAR(b.T_star, (M - s.m * s.lip_g) / mt, 1e-12);
  EXPECT_NEAR(b.h_star_NT, s.gamma / (2.0 * s.m * 4 * b.b_star * 1.5), 1e-15);
  EXPECT_TRUE(b.cap_valid);
  EXPECT_TRUE(b.contractive);
  EXPECT_TRUE(b.uniqueness_N);
}

TEST(BStar, TrivialAndPostHocBounds) {
  const GameSpec zero = build_quadratic_nearest_neighbor(3, 0.0, {1.0, 0.0, 0.0});
  EXPECT_DOUBLE_EQ(estimate_b_star(zero, 0.1, 1.0), 0.0);

  const GameSpec two = build_quadratic_nearest_neighbor(2, 0.0);
  EXPECT_DOUBLE_EQ(estimate_b_star(two, 0.1, 1.0), 1.0);

  const GameSpec s = build_quadratic_nearest_neighbor(3, 0.1);
  const TimeGrid grid(0.1, 5);
  const double b = estimate_b_star(s, grid.h, grid.T());
  const NllSolution sol = solve_nll(s, grid, 3);
  for (const auto& layer : sol.value) {
    for (double v : layer.raw()) EXPECT_LE(v, b * (1.0 + grid.T()) + 1e-12);
  }
}

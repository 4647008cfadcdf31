#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlllab/error.hpp"
#include "nlllab/nll_finite.hpp"
#include "oracles.hpp"

using namespace nlllab;

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    ((f(lo) > 0.0) == (f(mid) > 0.0) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double clamp_change(double v, double s2, double h) { return std::clamp(v, s2 * h, 1.0 - s2 * h); }

}  // namespace

TEST(SolveOneStep, TwoPlayerSystemMatchesBisection) {
  const double s2 = 0.05, h = 0.4;
  const GameSpec spec = build_quadratic_nearest_neighbor(2, s2);
  const TransitionKernel kernel(1, 2);
  const SimplexLattice& lat = kernel.lattice();
  const OneStepResult r = solve_one_step(spec, h, kernel, terminal_values(spec, lat));
  const std::size_t other0 = lat.rank(Counts{1, 0}), other1 = lat.rank(Counts{0, 1});

  const double diag = bisect([&](double a) { return clamp_change(h * (2 * a - 1), s2, h) - a; }, 0.0, 1.0);
  const double off = bisect([&](double a) { return clamp_change(h * (1 - 2 * a), s2, h) - a; }, 0.0, 1.0);
  EXPECT_NEAR(r.alpha.row(0, other0)[1], diag, 1e-10);
  EXPECT_NEAR(r.alpha.row(1, other1)[0], diag, 1e-10);
  EXPECT_NEAR(r.alpha.row(0, other1)[1], off, 1e-10);
  EXPECT_NEAR(r.alpha.row(1, other0)[0], off, 1e-10);
  EXPECT_NEAR(off, h / (1 + 2 * h), 1e-12);
  EXPECT_FALSE(r.report.contractive);
  EXPECT_TRUE(r.report.damped);
  EXPECT_LE(r.report.residual, 1e-11);
}

TEST(SolveOneStep, ContractionFlagFollowsTheStep) {
  const GameSpec spec = build_quadratic_nearest_neighbor(2, 0.05);
  const TransitionKernel kernel(1, 2);
  const NodeValues phi = terminal_values(spec, kernel.lattice());
  const OneStepResult r = solve_one_step(spec, 0.1, kernel, phi);
  EXPECT_DOUBLE_EQ(r.report.L_phi, 1.0);
  EXPECT_TRUE(r.report.contractive);
  EXPECT_FALSE(r.report.damped);
  EXPECT_LT(r.report.contraction_estimate, 1.0);
}

TEST(SolveOneStep, NonConvergenceRaisesWithReport) {
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.05);
  const TransitionKernel kernel(3, 3);
  const NodeValues phi = terminal_values(spec, kernel.lattice());
  FixedPointOptions opt;
  opt.max_outer = 1;
  opt.eps_fp = 1e-15;
  try {
    solve_one_step(spec, 0.05, kernel, phi, opt);
    FAIL() << "expected FixedPointError";
  } catch (const FixedPointError& e) {
    EXPECT_EQ(e.report().iterations, 1);
    EXPECT_GT(e.report().residual, 1e-15);
  }
  try {
    solve_nll(spec, TimeGrid(0.05, 2), 3, opt);
    FAIL() << "expected FixedPointError";
  } catch (const SolverError& e) {
    EXPECT_NE(std::string(e.what()).find("step 1"), std::string::npos) << e.what();
  }
}

// v(0, x, z) for K = 1 against the exhaustive expectation over the four joint
// next states of the two players.
TEST(SolveNll, OneStepValueMatchesExhaustiveExpectation) {
  const double s2 = 0.01, h = 0.1;
  const GameSpec spec = build_quadratic_nearest_neighbor(2, s2);
  const NllSolution sol = solve_nll(spec, TimeGrid(h, 1), 1);
  const SimplexLattice& lat = sol.lattice();
  auto change = [&](State x, State other) {
    const Counts c = other == 0 ? Counts{1, 0} : Counts{0, 1};
    return sol.policy[0].row(x, lat.rank(c))[1 - x];
  };
  for (State x = 0; x < 2; ++x) {
    for (State other = 0; other < 2; ++other) {
      const double p = change(x, other), q = change(other, x);
      double ev = 0.0;
      for (int mx = 0; mx < 2; ++mx) {
        for (int mo = 0; mo < 2; ++mo) {
          const State nx = mx ? 1 - x : x, no = mo ? 1 - other : other;
          ev += (mx ? p : 1 - p) * (mo ? q : 1 - q) * (nx != no ? 1.0 : 0.0);
        }
      }
      const double want = p * p / (2.0 * h) + ev;
      const Counts c = other == 0 ? Counts{1, 0} : Counts{0, 1};
      EXPECT_NEAR(sol.value[0](x, lat.rank(c)), want, 1e-10);
    }
  }
}

TEST(SolveNll, TerminalLayerAndBounds) {
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.1);
  const TimeGrid grid(0.02, 10);
  const NllSolution sol = solve_nll(spec, grid, 4);
  ASSERT_EQ(sol.value.size(), 11u);
  ASSERT_EQ(sol.policy.size(), 10u);
  ASSERT_EQ(sol.reports.size(), 10u);
  EXPECT_EQ(sol.value.back(), terminal_values(spec, sol.lattice()));
  const double b = estimate_b_star(spec, grid.h, grid.T());
  for (const auto& layer : sol.value) {
    for (double v : layer.raw()) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_LE(std::abs(v), b * (1 + grid.T()) + 1e-8);
    }
  }
  for (int k = 0; k < grid.K; ++k) {
    for (std::size_t n = 0; n < sol.lattice().size(); ++n) {
      for (State x = 0; x < 3; ++x) {
        EXPECT_TRUE(admissible_set(spec, grid.h, x).contains(sol.policy[k].row(x, n), 1e-12));
      }
    }
  }
}

TEST(SolveNll, WorkerCountDoesNotChangeTheResult) {
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.1);
  FixedPointOptions a, b;
  a.workers = 1;
  b.workers = 4;
  a.init = b.init = InitKind::Random;
  a.seed = b.seed = 99;
  const NllSolution s1 = solve_nll(spec, TimeGrid(0.02, 5), 5, a);
  const NllSolution s2 = solve_nll(spec, TimeGrid(0.02, 5), 5, b);
  EXPECT_EQ(s1.value, s2.value);
  EXPECT_EQ(s1.policy, s2.policy);
}

TEST(GridLipschitz, ElementaryMovesEqualAllPairs) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const int d = 3, N = 5, m = 3;
  const SimplexLattice lat(N, d);
  NodeValues phi(d, lat.size());
  NodePolicy pol(d, lat.size());
  for (double& v : phi.raw()) v = U(rng);
  for (std::size_t n = 0; n < lat.size(); ++n) {
    for (State x = 0; x < d; ++x) {
      const Vec r = oracle::random_simplex(d, rng);
      std::copy(r.begin(), r.end(), pol.row(x, n).begin());
    }
  }
  double all_v = 0.0, all_p = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    for (std::size_t j = i + 1; j < lat.size(); ++j) {
      const double dist = l1_distance(lat.point(i), lat.point(j));
      for (State x = 0; x < d; ++x) {
        all_v = std::max(all_v, std::abs(phi(x, i) - phi(x, j)) / dist);
        all_p = std::max(all_p, l1_distance(pol.row(x, i), pol.row(x, j)) / dist);
      }
    }
  }
  EXPECT_NEAR(estimate_grid_lipschitz(phi, lat, m), m * all_v, 1e-12);
  EXPECT_NEAR(policy_grid_lipschitz(pol, lat), all_p, 1e-12);
  const auto f = [&](State x, const Counts& c) { return phi(x, lat.rank(c)); };
  EXPECT_NEAR(estimate_grid_lipschitz(f, N, d, m), m * all_v, 1e-12);
}

TEST(VerifyEquilibrium, SolverOutputHasZeroGap) {
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.1);
  const TimeGrid grid(0.05, 4);
  const NllSolution sol = solve_nll(spec, grid, 3);
  LawCache cache;
  const EquilibriumCheck chk = verify_equilibrium(spec, grid, *sol.kernel, sol.policy, {}, &cache);
  EXPECT_LE(chk.gap, 1e-9);
  EXPECT_GT(cache.hits(), 0u);
  for (int k = 0; k <= grid.K; ++k) {
    for (std::size_t i = 0; i < sol.value[k].raw().size(); ++i) {
      EXPECT_NEAR(chk.best_response[k].raw()[i], sol.value[k].raw()[i], 1e-9);
    }
  }

  auto bent = sol.policy;
  auto row = bent[1].row(0, 2);
  row[0] -= 0.05;
  row[1] += 0.05;
  EXPECT_GT(verify_equilibrium(spec, grid, *sol.kernel, bent).gap, 1e-4);

  auto illegal = sol.policy;
  illegal[0].row(0, 0)[2] = -0.5;
  EXPECT_THROW(verify_equilibrium(spec, grid, *sol.kernel, illegal), DomainError);
}

TEST(ValueInterpolant, ReproducesNodeValues) {
  const GameSpec spec = build_quadratic_nearest_neighbor(3, 0.1);
  const NllSolution sol = solve_nll(spec, TimeGrid(0.05, 2), 4);
  const ValueInterpolant f = interpolate_value_to_simplex(sol);
  for (std::size_t n = 0; n < sol.lattice().size(); ++n) {
    for (State x = 0; x < 3; ++x) EXPECT_NEAR(f(0, x, sol.lattice().point(n)), sol.value[0](x, n), 1e-14);
  }
}

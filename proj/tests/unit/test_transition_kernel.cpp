#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "nlllab/error.hpp"
#include "nlllab/transition_kernel.hpp"
#include "oracles.hpp"

using namespace nlllab;

TEST(ExactLaw, MatchesBruteForceEnumeration) {
  std::mt19937_64 rng(42);
  for (int d = 2; d <= 3; ++d) {
    for (int N = 0; N <= 5; ++N) {
      const oracle::SmoothRows rows(d, rng);
      const RowLookup beta = [&](State y, const Counts& c) { return rows(y, c); };
      const SimplexLattice lat(N, d);
      for (std::size_t node = 0; node < lat.size(); ++node) {
        for (State x = 0; x < d; ++x) {
          const auto got = oracle::as_map(exact_law(x, lat.counts(node), beta));
          const auto want = oracle::brute_force_law(x, lat.counts(node), beta);
          EXPECT_LT(oracle::law_distance(got, want), 1e-14) << "d=" << d << " N=" << N;
        }
      }
    }
  }
}

TEST(ExactLaw, DeterministicRowsGiveAPointMass) {
  const RowLookup stay = [](State y, const Counts& c) {
    Vec r(c.size(), 0.0);
    r[y] = 1.0;
    return r;
  };
  const TransitionLaw law = exact_law(1, Counts{2, 0, 3}, stay);
  ASSERT_EQ(law.support.size(), 1u);
  EXPECT_EQ(law.support[0], (Counts{2, 0, 3}));
  EXPECT_DOUBLE_EQ(law.probs[0], 1.0);
}

TEST(ExactLaw, RejectsNonSimplexRows) {
  const RowLookup bad = [](State, const Counts&) { return Vec{0.7, 0.7}; };
  EXPECT_THROW(exact_law(0, Counts{1, 1}, bad), DomainError);
  const RowLookup neg = [](State, const Counts&) { return Vec{1.5, -0.5}; };
  EXPECT_THROW(exact_law(0, Counts{1, 1}, neg), DomainError);
}

TEST(TransitionKernel, ConvolutionOrderDoesNotMatter) {
  std::mt19937_64 rng(7);
  const int d = 4, N = 5;
  const TransitionKernel kernel(N, d);
  const oracle::SmoothRows rows(d, rng);
  const RowLookup beta = [&](State y, const Counts& c) { return rows(y, c); };
  const std::vector<State> order{3, 1, 0, 2};
  for (std::size_t node = 0; node < kernel.lattice().size(); node += 7) {
    const Counts& z = kernel.lattice().counts(node);
    const auto a = oracle::as_map(kernel.expand(2, z, kernel.law(2, z, beta)));
    const auto b = oracle::as_map(kernel.expand(2, z, kernel.law(2, z, beta, order)));
    EXPECT_LT(oracle::law_distance(a, b), 1e-14);
  }
}

TEST(TransitionKernel, NodePolicyAndLookupAgree) {
  std::mt19937_64 rng(8);
  const int d = 3, N = 4;
  const TransitionKernel kernel(N, d);
  const SimplexLattice& lat = kernel.lattice();
  const oracle::SmoothRows rows(d, rng);
  NodePolicy pol(d, lat.size());
  for (std::size_t n = 0; n < lat.size(); ++n) {
    for (State y = 0; y < d; ++y) {
      const Vec r = rows(y, lat.counts(n));
      std::copy(r.begin(), r.end(), pol.row(y, n).begin());
    }
  }
  const RowLookup beta = [&](State y, const Counts& c) { return rows(y, c); };
  NodeValues phi(d, lat.size());
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (double& v : phi.raw()) v = U(rng);
  for (std::size_t n = 0; n < lat.size(); ++n) {
    for (State x = 0; x < d; ++x) {
      const Vec a = kernel.expect(x, n, phi, pol);
      const GridFunction f = [&](State y, const Counts& c) { return phi(y, lat.rank(c)); };
      const Vec b = expect_value(x, lat.counts(n), f, beta);
      for (int y = 0; y < d; ++y) EXPECT_NEAR(a[y], b[y], 1e-14);
    }
  }
}

TEST(TransitionKernel, FirstMomentIdentity) {
  std::mt19937_64 rng(9);
  const int d = 3;
  const oracle::SmoothRows rows(d, rng);
  const RowLookup beta = [&](State y, const Counts& c) { return rows(y, c); };
  const Counts z{3, 1, 2};
  const State x = 1;
  const TransitionLaw law = exact_law(x, z, beta);
  Vec mean(d, 0.0), want(d, 0.0);
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    for (int j = 0; j < d; ++j) mean[j] += law.probs[i] * law.support[i][j];
  }
  for (State y = 0; y < d; ++y) {
    Counts s = z;
    ++s[x];
    --s[y];
    if (z[y] == 0) continue;
    const Vec r = rows(y, s);
    for (int j = 0; j < d; ++j) want[j] += z[y] * r[j];
  }
  for (int j = 0; j < d; ++j) EXPECT_NEAR(mean[j], want[j], 1e-13);
}

TEST(TransitionKernel, TableCapRaises) {
  KernelCaps caps;
  caps.table_entries = 100;
  EXPECT_THROW(TransitionKernel(20, 4, caps), SizeError);
}

TEST(SampleLaw, MonteCarloMatchesExpectation) {
  std::mt19937_64 rng(10);
  const int d = 3;
  const oracle::SmoothRows rows(d, rng);
  const RowLookup beta = [&](State y, const Counts& c) { return rows(y, c); };
  const Counts z{2, 2, 1};
  const GridFunction phi = [](State y, const Counts& c) { return (y + 1.0) * c[0] - c[2] * c[2]; };
  const Vec exact = expect_value(0, z, phi, beta);
  const std::size_t n = 200000;
  const auto draws = sample_law(0, z, beta, rng, n);
  for (State y = 0; y < d; ++y) {
    double s = 0.0, s2 = 0.0;
    for (const auto& c : draws) {
      const double v = phi(y, c);
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(mean, exact[y], 5.0 * se);
  }
}

TEST(CoupledSample, IdenticalInputsGiveZeroDistance) {
  std::mt19937_64 rng(11);
  const oracle::SmoothRows rows(3, rng);
  const RowLookup beta = [&](State y, const Counts& c) { return rows(y, c); };
  const auto r = coupled_sample(0, Counts{1, 2, 1}, beta, Counts{1, 2, 1}, beta, rng, 1000);
  EXPECT_DOUBLE_EQ(r.mean, 0.0);
  EXPECT_EQ(r.distances.size(), 1000u);
}

TEST(CoupledSample, OneCoordinateShiftBound) {
  // d = 2, controls differing by δ in one coordinate at one argument.
  std::mt19937_64 rng(12);
  const double delta = 0.2;
  const Counts z{2, 2};
  const RowLookup a = [](State y, const Counts&) { return y == 0 ? Vec{0.6, 0.4} : Vec{0.3, 0.7}; };
  const RowLookup b = [&](State y, const Counts& c) {
    Vec r = a(y, c);
    if (y == 0 && c == Counts{2, 2}) {
      r[0] -= delta;
      r[1] += delta;
    }
    return r;
  };
  const auto r = coupled_sample(0, z, a, z, b, rng, 50000);
  EXPECT_LE(r.mean, 2.0 * delta + 3.0 * r.stderr_mean);
  EXPECT_GT(r.mean, 0.0);
}

TEST(WriteLawCsv, HeaderAndRows) {
  const RowLookup half = [](State, const Counts&) { return Vec{0.5, 0.5}; };
  std::ostringstream out;
  write_law_csv(out, exact_law(0, Counts{1, 0}, half));
  const std::string text = out.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "c_0,c_1,prob");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
}

TEST(LawCache, MemoizesAndPersists) {
  std::mt19937_64 rng(13);
  const int d = 3, N = 3;
  const TransitionKernel kernel(N, d);
  const SimplexLattice& lat = kernel.lattice();
  const oracle::SmoothRows rows(d, rng);
  NodePolicy pol(d, lat.size());
  for (std::size_t n = 0; n < lat.size(); ++n) {
    for (State y = 0; y < d; ++y) {
      const Vec r = rows(y, lat.counts(n));
      std::copy(r.begin(), r.end(), pol.row(y, n).begin());
    }
  }
  const auto dir = std::filesystem::temp_directory_path() / "nlllab_law_cache_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  {
    LawCache cache(dir);
    const RankLaw a = cache.get(kernel, 1, 4, pol);
    const RankLaw b = cache.get(kernel, 1, 4, pol);
    EXPECT_EQ(cache.misses(), 1u);
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(a.ranks, b.ranks);
    EXPECT_EQ(a.probs, b.probs);
    const RankLaw direct = kernel.law(1, 4, pol);
    EXPECT_EQ(a.ranks, direct.ranks);
    EXPECT_EQ(a.probs, direct.probs);
  }
  {
    LawCache cache(dir);
    const RankLaw a = cache.get(kernel, 1, 4, pol);
    EXPECT_EQ(cache.hits(), 1u);
    EXPECT_EQ(a.probs, kernel.law(1, 4, pol).probs);
    NodePolicy uniform(d, lat.size());
    for (double& v : uniform.raw()) v = 1.0 / d;
    cache.get(kernel, 1, 4, uniform);
    EXPECT_EQ(cache.misses(), 1u);
  }
  std::filesystem::remove_all(dir);
}

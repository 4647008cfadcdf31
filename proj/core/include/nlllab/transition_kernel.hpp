#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "nlllab/game_model.hpp"
#include "nlllab/simplex_lattice.hpp"
#include "nlllab/types.hpp"

namespace nlllab {

/// β(y, counts) for the shifted count vector seen by an agent in state y.
using RowLookup = std::function<Vec(State y, const Counts& shifted)>;

/// φ(y, counts) on the empirical grid.
using GridFunction = std::function<double(State y, const Counts& counts)>;

/// Exact pmf of the population update N Z'(x, z, β).
struct TransitionLaw {
  State x = 0;
  Counts source;
  std::vector<Counts> support;
  std::vector<double> probs;
};

/// Sparse law over ranks of the N-lattice.
struct RankLaw {
  std::vector<std::size_t> ranks;
  std::vector<double> probs;
};

struct KernelCaps {
  /// Bound on the total size of the per-population composition tables,
  /// Σ_{n <= N} C(n + d - 1, d - 1) = C(N + d, d).
  std::uint64_t table_entries = 5'000'000;
};

/// Precomputed multinomial outcome tables for populations 0..N in d states.
class TransitionKernel {
 public:
  TransitionKernel(int N, int d, KernelCaps caps = {});

  int population() const { return N_; }
  int dim() const { return d_; }
  const SimplexLattice& lattice() const { return *lattices_.back(); }

  /// Law of N Z'(x, z, β) where z = lattice().counts(node) and β is read from a
  /// node-indexed policy. Factors are convolved in `order` (default 0..d-1).
  RankLaw law(State x, std::size_t node, const NodePolicy& beta,
              std::span<const State> order = {}) const;
  RankLaw law(State x, const Counts& z, const RowLookup& beta,
              std::span<const State> order = {}) const;

  TransitionLaw expand(State x, const Counts& z, const RankLaw& law) const;

  /// E(x, z, φ, β)_y = Σ law(z') φ(y, z') for every y.
  Vec expect(const RankLaw& law, const NodeValues& phi) const;
  Vec expect(State x, std::size_t node, const NodeValues& phi, const NodePolicy& beta) const;

 private:
  template <class Rows>
  RankLaw convolve(State x, const Counts& z, Rows&& rows, std::span<const State> order) const;

  int N_;
  int d_;
  std::vector<std::unique_ptr<SimplexLattice>> lattices_;  // n = 0..N
  std::vector<std::vector<double>> coef_;                  // multinomial coefficients
};

/// Checks that `row` is a probability vector (entries >= -1e-12, sum 1 within
/// 1e-9); DomainError otherwise.
void check_simplex_row(VecView row, State y, const Counts& at);

TransitionLaw exact_law(State x, const Counts& z, const RowLookup& beta);
Vec expect_value(State x, const Counts& z, const GridFunction& phi, const RowLookup& beta);

/// iid draws of N Z'(x, z, β) by per-agent categorical sampling.
std::vector<Counts> sample_law(State x, const Counts& z, const RowLookup& beta,
                               std::mt19937_64& rng, std::size_t n);

struct CoupledSampleResult {
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::vector<double> distances;  // per-sample |Z'_α - Z'_α̃|_1
};

/// Shared-uniform coupling of the updates (x, z, α) and (x, z̃, α̃): agent i in
/// state y draws one ξ ~ U(0,1) and adds χ[ξ <= p_j] to coordinate j of both
/// updates. The first min(z_y, z̃_y) agents in state y share ξ; the surplus
/// agents of either population draw their own. Only coordinate marginals are
/// multinomial, which is all the l1 distance depends on in expectation.
CoupledSampleResult coupled_sample(State x, const Counts& z, const RowLookup& alpha,
                                   const Counts& z_tilde, const RowLookup& alpha_tilde,
                                   std::mt19937_64& rng, std::size_t n);

/// counts..., prob
void write_law_csv(std::ostream& out, const TransitionLaw& law);

/// Thread-safe memo of rank laws keyed by (x, node, fingerprint of the policy
/// rows the law reads). With a directory set, laws are also persisted as small
/// binary files and reloaded by later runs.
class LawCache {
 public:
  explicit LawCache(std::optional<std::filesystem::path> dir = std::nullopt);
  /// Directory from NLLLAB_CACHE_DIR, if set and non-empty.
  static LawCache from_env();

  RankLaw get(const TransitionKernel& kernel, State x, std::size_t node,
              const NodePolicy& beta);

  std::size_t hits() const;
  std::size_t misses() const;

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::uint64_t, RankLaw> memo_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

}  // namespace nlllab

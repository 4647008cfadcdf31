#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "nlllab/types.hpp"

namespace nlllab {

inline constexpr std::uint64_t kDefaultLatticeCap = 2'000'000;

/// C(n, k) with saturation at UINT64_MAX.
std::uint64_t binomial(int n, int k);

/// Number of compositions of n into d nonnegative parts, C(n+d-1, d-1).
std::uint64_t lattice_size(int n, int d);

/// The lattice {c in Z^d_{>=0} : sum c = n}, i.e. the simplex points with
/// coordinates in {0, 1/n, ..., 1}, in lexicographic order of the counts.
///
/// Used both as the empirical-distribution grid of N untagged players and as
/// the discretization of the mean-field simplex. Interpolation uses the Kuhn
/// (Freudenthal) triangulation expressed in cumulative coordinates
/// y_k = c_0 + ... + c_{k-1}, in which the lattice is {0 <= y_1 <= ... <= y_{d-1} <= n}.
class SimplexLattice {
 public:
  SimplexLattice(int n, int d, std::uint64_t cap = kDefaultLatticeCap);

  int resolution() const { return n_; }
  int dim() const { return d_; }
  std::size_t size() const { return nodes_.size(); }

  const Counts& counts(std::size_t node) const { return nodes_[node]; }
  /// counts / n as a probability vector.
  std::span<const double> point(std::size_t node) const {
    return {points_.data() + node * static_cast<std::size_t>(d_), static_cast<std::size_t>(d_)};
  }
  const std::vector<Counts>& nodes() const { return nodes_; }

  /// Position of `c` in lexicographic order. `c` must sum to n.
  std::size_t rank(std::span<const int> c) const;

  /// Rank of counts(node) + e_plus - e_minus, or nullopt if it leaves the lattice.
  std::optional<std::size_t> shifted(std::size_t node, State plus, State minus) const;

  /// Barycentric decomposition of `mu` on the Kuhn triangulation: pairs of
  /// (node rank, weight) with weights > 0 summing to 1. Points outside the
  /// simplex by more than 1e-9 raise DomainError.
  std::vector<std::pair<std::size_t, double>> barycentric(std::span<const double> mu) const;

  /// Piecewise-linear interpolation of a node-indexed table at `mu`.
  double interpolate(std::span<const double> node_values, std::span<const double> mu) const;

 private:
  int n_;
  int d_;
  std::vector<Counts> nodes_;
  std::vector<double> points_;
  // binom_[a * (d+1) + b] = C(a, b) for a <= n + d, b <= d.
  std::vector<std::uint64_t> binom_;
  std::uint64_t choose(int a, int b) const;
};

/// All compositions of N into d parts in lexicographic order.
std::vector<Counts> enumerate_empirical(int N, int d, std::uint64_t cap = kDefaultLatticeCap);

}  // namespace nlllab

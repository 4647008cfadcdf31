#include "nlllab/simplex_lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nlllab/error.hpp"

namespace nlllab {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) {
    const std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
    // r * num / i is exact at every step; guard the multiplication.
    if (r > std::numeric_limits<std::uint64_t>::max() / num) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    r = r * num / static_cast<std::uint64_t>(i);
  }
  return r;
}

std::uint64_t lattice_size(int n, int d) { return binomial(n + d - 1, d - 1); }

namespace {

void enumerate_into(int n, int d, std::vector<Counts>& out) {
  Counts c(static_cast<std::size_t>(d), 0);
  // Odometer over compositions in lexicographic order.
  auto fill = [&](int from, int remaining) {
    for (int i = from; i < d - 1; ++i) c[static_cast<std::size_t>(i)] = 0;
    c[static_cast<std::size_t>(d - 1)] = remaining;
  };
  fill(0, n);
  while (true) {
    out.push_back(c);
    // Find the rightmost position i < d-1 that can be incremented, i.e. the
    // tail after it still holds at least one unit.
    int tail = c[static_cast<std::size_t>(d - 1)];
    int i = d - 2;
    while (i >= 0 && tail == 0) {
      tail += c[static_cast<std::size_t>(i)];
      --i;
    }
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    fill(i + 1, tail - 1);
  }
}

}  // namespace

SimplexLattice::SimplexLattice(int n, int d, std::uint64_t cap) : n_(n), d_(d) {
  if (d < 1) throw DomainError("simplex lattice needs d >= 1");
  if (n < 0) throw DomainError("simplex lattice needs n >= 0");
  const std::uint64_t count = lattice_size(n, d);
  if (count > cap) {
    throw SizeError("lattice size C(" + std::to_string(n + d - 1) + "," + std::to_string(d - 1) +
                    ") = " + std::to_string(count) + " exceeds cap " + std::to_string(cap));
  }
  nodes_.reserve(static_cast<std::size_t>(count));
  enumerate_into(n, d, nodes_);

  points_.resize(nodes_.size() * static_cast<std::size_t>(d));
  const double inv = n > 0 ? 1.0 / n : 0.0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (int j = 0; j < d; ++j) {
      points_[i * static_cast<std::size_t>(d) + static_cast<std::size_t>(j)] =
          n > 0 ? nodes_[i][static_cast<std::size_t>(j)] * inv : 1.0 / d;
    }
  }

  const int rows = n + d + 1;
  binom_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(d + 1), 0);
  for (int a = 0; a < rows; ++a) {
    for (int b = 0; b <= d; ++b) {
      binom_[static_cast<std::size_t>(a) * static_cast<std::size_t>(d + 1) +
             static_cast<std::size_t>(b)] = binomial(a, b);
    }
  }
}

std::uint64_t SimplexLattice::choose(int a, int b) const {
  if (a < 0 || b < 0 || b > a) return 0;
  return binom_[static_cast<std::size_t>(a) * static_cast<std::size_t>(d_ + 1) +
                static_cast<std::size_t>(b)];
}

std::size_t SimplexLattice::rank(std::span<const int> c) const {
  // Compositions preceding c: at position i with `rem` units left, every value
  // v < c_i contributes C(rem - v + k, k) completions, k = d - i - 2. The sum
  // telescopes to C(rem + k + 1, k + 1) - C(rem - c_i + k + 1, k + 1).
  std::uint64_t r = 0;
  int rem = n_;
  for (int i = 0; i + 1 < d_; ++i) {
    const int k = d_ - i - 2;
    const int ci = c[static_cast<std::size_t>(i)];
    r += choose(rem + k + 1, k + 1) - choose(rem - ci + k + 1, k + 1);
    rem -= ci;
  }
  return static_cast<std::size_t>(r);
}

std::optional<std::size_t> SimplexLattice::shifted(std::size_t node, State plus,
                                                   State minus) const {
  const Counts& c = nodes_[node];
  if (plus == minus) return node;
  if (c[static_cast<std::size_t>(minus)] == 0) return std::nullopt;
  Counts s = c;
  ++s[static_cast<std::size_t>(plus)];
  --s[static_cast<std::size_t>(minus)];
  return rank(s);
}

std::vector<std::pair<std::size_t, double>> SimplexLattice::barycentric(
    std::span<const double> mu) const {
  if (mu.size() != static_cast<std::size_t>(d_)) {
    throw DomainError("barycentric: dimension mismatch");
  }
  constexpr double kTol = 1e-9;
  double total = 0.0;
  for (double m : mu) {
    if (!(m >= -kTol)) throw DomainError("barycentric: point outside the simplex");
    total += std::max(m, 0.0);
  }
  if (std::abs(total - 1.0) > kTol) throw DomainError("barycentric: point outside the simplex");
  if (n_ == 0 || d_ == 1) return {{0, 1.0}};

  const int m = d_ - 1;
  std::vector<double> y(static_cast<std::size_t>(m));
  double acc = 0.0;
  for (int k = 0; k < m; ++k) {
    acc += std::max(mu[static_cast<std::size_t>(k)], 0.0) / total;
    double yk = std::clamp(acc * n_, 0.0, static_cast<double>(n_));
    const double r = std::round(yk);
    if (std::abs(yk - r) < 1e-10 * std::max(1.0, static_cast<double>(n_))) yk = r;
    y[static_cast<std::size_t>(k)] = yk;
  }
  for (int k = 1; k < m; ++k) {
    y[static_cast<std::size_t>(k)] = std::max(y[static_cast<std::size_t>(k)],
                                              y[static_cast<std::size_t>(k - 1)]);
  }

  std::vector<int> base(static_cast<std::size_t>(m));
  std::vector<double> frac(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double fl = std::floor(y[static_cast<std::size_t>(k)]);
    base[static_cast<std::size_t>(k)] = static_cast<int>(fl);
    frac[static_cast<std::size_t>(k)] = y[static_cast<std::size_t>(k)] - fl;
  }
  // Increment order: decreasing fractional part, ties by larger index first so
  // that y stays nondecreasing along the simplex path.
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double fa = frac[static_cast<std::size_t>(a)];
    const double fb = frac[static_cast<std::size_t>(b)];
    if (fa != fb) return fa > fb;
    return a > b;
  });

  auto to_counts = [&](const std::vector<int>& yy) {
    Counts c(static_cast<std::size_t>(d_));
    int prev = 0;
    for (int k = 0; k < m; ++k) {
      c[static_cast<std::size_t>(k)] = yy[static_cast<std::size_t>(k)] - prev;
      prev = yy[static_cast<std::size_t>(k)];
    }
    c[static_cast<std::size_t>(m)] = n_ - prev;
    return c;
  };

  std::vector<std::pair<std::size_t, double>> out;
  std::vector<int> vertex = base;
  double prev_frac = 1.0;
  for (int step = 0; step <= m; ++step) {
    const double next_frac =
        step < m ? frac[static_cast<std::size_t>(order[static_cast<std::size_t>(step)])] : 0.0;
    const double w = prev_frac - next_frac;
    if (w > 0.0) out.emplace_back(rank(to_counts(vertex)), w);
    if (step == m || next_frac == 0.0) break;
    ++vertex[static_cast<std::size_t>(order[static_cast<std::size_t>(step)])];
    prev_frac = next_frac;
  }
  return out;
}

double SimplexLattice::interpolate(std::span<const double> node_values,
                                   std::span<const double> mu) const {
  double v = 0.0;
  for (const auto& [node, w] : barycentric(mu)) v += w * node_values[node];
  return v;
}

std::vector<Counts> enumerate_empirical(int N, int d, std::uint64_t cap) {
  SimplexLattice lattice(N, d, cap);
  return lattice.nodes();
}

}  // namespace nlllab

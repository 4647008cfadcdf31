#pragma once

// Independent reference computations shared by the unit and property tests.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "nlllab/transition_kernel.hpp"

namespace oracle {

using nlllab::Counts;
using nlllab::State;
using nlllab::Vec;

// Joint moves of every untagged agent, one at a time.
inline std::map<Counts, double> brute_force_law(State x, const Counts& z, const nlllab::RowLookup& beta) {
  const int d = static_cast<int>(z.size());
  std::vector<Vec> rows;
  for (State y = 0; y < d; ++y) {
    for (int i = 0; i < z[y]; ++i) {
      Counts shifted = z;
      ++shifted[x];
      --shifted[y];
      rows.push_back(beta(y, shifted));
    }
  }
  std::map<Counts, double> pmf;
  std::vector<int> choice(rows.size(), 0);
  while (true) {
    double p = 1.0;
    Counts out(static_cast<std::size_t>(d), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      p *= rows[i][static_cast<std::size_t>(choice[i])];
      ++out[choice[i]];
    }
    if (p > 0.0) pmf[out] += p;
    std::size_t i = 0;
    while (i < choice.size() && ++choice[i] == d) choice[i++] = 0;
    if (i == choice.size()) break;
  }
  return pmf;
}

inline std::map<Counts, double> as_map(const nlllab::TransitionLaw& law) {
  std::map<Counts, double> m;
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    if (law.probs[i] > 0.0) m[law.support[i]] += law.probs[i];
  }
  return m;
}

inline double law_distance(const std::map<Counts, double>& a, const std::map<Counts, double>& b) {
  double s = 0.0;
  for (const auto& [c, p] : a) {
    auto it = b.find(c);
    s += std::abs(p - (it == b.end() ? 0.0 : it->second));
  }
  for (const auto& [c, p] : b) {
    if (!a.count(c)) s += p;
  }
  return s;
}

// Rows that are affine in μ = counts / n, normalized; Lipschitz in μ.
struct SmoothRows {
  int d;
  std::vector<double> w, b;

  SmoothRows(int dim, std::mt19937_64& rng, double slope = 0.3) : d(dim), w(dim * dim), b(dim * dim) {
    std::uniform_real_distribution<double> U(0.1, 1.0), B(-slope, slope);
    for (auto& v : w) v = U(rng);
    for (auto& v : b) v = B(rng);
  }
  Vec operator()(State y, const Counts& c) const {
    const int n = std::accumulate(c.begin(), c.end(), 0);
    Vec row(static_cast<std::size_t>(d));
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      const double mu = n > 0 ? static_cast<double>(c[j]) / n : 0.0;
      row[j] = std::max(0.0, w[y * d + j] + b[y * d + j] * mu);
      s += row[j];
    }
    for (double& r : row) r /= s;
    return row;
  }
};

inline Vec random_simplex(int d, std::mt19937_64& rng) {
  std::exponential_distribution<double> E(1.0);
  Vec v(static_cast<std::size_t>(d));
  double s = 0.0;
  for (auto& x : v) s += (x = E(rng));
  for (auto& x : v) x /= s;
  return v;
}

}  // namespace oracle

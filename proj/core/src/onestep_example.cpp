#include "nlllab/onestep_example.hpp"

#include <algorithm>
#include <cmath>

#include "nlllab/error.hpp"

namespace nlllab {

namespace {

double clamp_change(double v, double sigma2, double h) {
  const double lo = sigma2 * h;
  const double hi = 1.0 - sigma2 * h;
  return std::min(std::max(v, lo), hi);
}

}  // namespace

double onestep_residual(double sigma2, double h, double mu0, double mu) {
  const double a0 = clamp_change(h * (2.0 * mu - 1.0), sigma2, h);
  const double a1 = clamp_change(h * (1.0 - 2.0 * mu), sigma2, h);
  if (mu0 == 0.5) {
    // Symmetric form: exactly zero at μ = 1/2.
    return 0.5 * (a0 - a1) + (0.5 - mu);
  }
  return a0 * (1.0 - mu0) + (1.0 - a1) * mu0 - mu;
}

OneStepScan scan_equilibria_onestep(double sigma2, double h, int mesh, double mu0,
                                    double touch_tol) {
  if (!(sigma2 >= 0.0)) throw DomainError("sigma2 must be >= 0");
  if (!(h > 0.0)) throw DomainError("h must be > 0");
  if (mesh < 2) throw DomainError("mesh must have at least 2 intervals");
  auto F = [&](double mu) { return onestep_residual(sigma2, h, mu0, mu); };

  std::vector<double> grid(static_cast<std::size_t>(mesh) + 1);
  std::vector<double> vals(grid.size());
  for (int i = 0; i <= mesh; ++i) {
    grid[static_cast<std::size_t>(i)] = static_cast<double>(i) / mesh;
    vals[static_cast<std::size_t>(i)] = F(grid[static_cast<std::size_t>(i)]);
  }

  // Runs of exact zeros on adjacent mesh nodes are reported as intervals.
  OneStepScan out;
  std::vector<double> roots;
  for (std::size_t i = 0; i < grid.size();) {
    if (vals[i] != 0.0) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < grid.size() && vals[j + 1] == 0.0) ++j;
    if (j == i) {
      roots.push_back(grid[i]);
    } else {
      out.intervals.emplace_back(grid[i], grid[j]);
    }
    i = j + 1;
  }
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (!((vals[i] < 0.0 && vals[i + 1] > 0.0) || (vals[i] > 0.0 && vals[i + 1] < 0.0))) continue;
    double lo = grid[i], hi = grid[i + 1];
    double flo = vals[i];
    while (true) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      const double fm = F(mid);
      if (fm == 0.0) {
        lo = hi = mid;
        break;
      }
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    roots.push_back(std::abs(F(lo)) <= std::abs(F(hi)) ? lo : hi);
  }
  // Touching points: local minima of |F| at interior mesh nodes without a
  // sign change nearby, refined by ternary search on the two adjacent cells.
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    const double a = std::abs(vals[i - 1]), b = std::abs(vals[i]), c = std::abs(vals[i + 1]);
    if (!(b <= a && b <= c) || b == 0.0) continue;
    if ((vals[i - 1] < 0.0) != (vals[i + 1] < 0.0)) continue;
    if ((vals[i] < 0.0) != (vals[i + 1] < 0.0)) continue;
    double lo = grid[i - 1], hi = grid[i + 1];
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (std::abs(F(m1)) <= std::abs(F(m2))) {
        hi = m2;
      } else {
        lo = m1;
      }
    }
    const double x = 0.5 * (lo + hi);
    if (std::abs(F(x)) <= touch_tol) roots.push_back(x);
  }

  std::sort(roots.begin(), roots.end());
  for (double r : roots) {
    if (!out.roots.empty() && r - out.roots.back() <= 1e-9) {
      // Keep the representative with the smaller residual.
      if (std::abs(F(r)) < out.residuals.back()) {
        out.roots.back() = r;
        out.residuals.back() = std::abs(F(r));
      }
      continue;
    }
    out.roots.push_back(r);
    out.residuals.push_back(std::abs(F(r)));
  }
  return out;
}

std::pair<double, double> critical_steps(double sigma2) {
  const double upper = 3.0 - 2.0 * std::sqrt(2.0);
  if (!(sigma2 > 0.0 && sigma2 < upper)) {
    throw DomainError("critical steps need 0 < sigma2 < 3 - 2 sqrt(2)");
  }
  const double root = std::sqrt(std::max(0.0, 1.0 - (6.0 - sigma2) * sigma2));
  return {(1.0 + sigma2 - root) / (4.0 * sigma2), (1.0 + sigma2 + root) / (4.0 * sigma2)};
}

}  // namespace nlllab

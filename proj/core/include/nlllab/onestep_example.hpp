#pragma once

#include <utility>
#include <vector>

namespace nlllab {

/// Two-state one-step synchronization game: μ is the mass in state 1 and
/// F(μ) = α0(μ)(1 - μ0) + (1 - α1(μ)) μ0 - μ with
/// α0 = clamp(h(2μ - 1), σ²h, 1 - σ²h), α1 = clamp(h(1 - 2μ), σ²h, 1 - σ²h).
double onestep_residual(double sigma2, double h, double mu0, double mu);

struct OneStepScan {
  std::vector<double> roots;      // isolated roots, ascending
  std::vector<double> residuals;  // |F(root)|
  /// Mesh intervals on which F vanishes identically (degenerate steps such as
  /// σ² = 0, h = 1).
  std::vector<std::pair<double, double>> intervals;
  /// Connected components of the zero set.
  int count() const { return static_cast<int>(roots.size() + intervals.size()); }
};

/// Roots of F on [0, 1]: sign changes on a uniform mesh refined by bisection,
/// isolated exact mesh zeros, and touching points where a local minimum of |F| falls
/// below `touch_tol`. Roots closer than 1e-9 are merged.
OneStepScan scan_equilibria_onestep(double sigma2, double h, int mesh = 10000, double mu0 = 0.5,
                                    double touch_tol = 1e-9);

/// (h_low, h_high) = (1 + σ² ∓ sqrt(1 - (6 - σ²)σ²)) / (4σ²); DomainError
/// unless 0 < σ² < 3 - 2√2.
std::pair<double, double> critical_steps(double sigma2);

}  // namespace nlllab

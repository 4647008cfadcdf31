#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "nlllab/game_model.hpp"
#include "nlllab/nll_finite.hpp"
#include "nlllab/simplex_lattice.hpp"

namespace nlllab {

/// Minimizing rates of ℓ(x, z, a) + a·Δ_x v over a_y >= σ² on S(x) \ {x};
/// dv[y] = v(y, z) - v(x, z). Entry x holds minus the sum of the others.
Vec cts_hamiltonian_min(const GameSpec& spec, State x, VecView mu, VecView dv);

/// (L^β φ)(x, z) = Σ_y Σ_{w != y} z_y β_w(y, z + e_x - e_y) [φ(x, z + e_w - e_y) - φ(x, z)]
/// in integer counts. β holds rate rows (off-diagonal entries are used).
NodeValues generator_apply(const SimplexLattice& lattice, const NodePolicy& beta,
                           const NodeValues& phi);

struct CtsOptions {
  int M = 2000;  // RK4 steps on [0, T]
  int workers = 1;
  /// When set, rerun with 2M steps and raise AccuracyError if the values at
  /// t = 0 differ by more than this.
  std::optional<double> halving_tol;
};

struct CtsSolution {
  int N = 0;
  double T = 0.0;
  int M = 0;
  std::shared_ptr<const SimplexLattice> lattice;
  std::vector<NodeValues> value;  // t_j = j T / M, j = 0..M
  std::vector<NodePolicy> rate;   // minimizing rates at each t_j

  double step() const { return T / M; }
};

/// Backward RK4 for -dv/dt = min_a [ℓ + a·Δ_x v] + L^{α(t)} v, v(T) = g, with
/// the minimizing rates recomputed at every stage.
CtsSolution solve_cts_nll(const GameSpec& spec, int N, double T, const CtsOptions& opt = {});

struct DiscreteVsCtsRow {
  int K = 0;
  double h = 0.0;
  double err_value = 0.0;
  double err_rate = 0.0;
};

/// For each K: solve the discrete equation with h = T/K, interpolate linearly
/// in time (policy held constant on the last interval) and take sup-norm
/// errors against the reference over its time samples.
std::vector<DiscreteVsCtsRow> compare_discrete_to_cts(const GameSpec& spec, int N, double T,
                                                      const std::vector<int>& K_list,
                                                      const CtsSolution& reference,
                                                      const FixedPointOptions& opt = {});

}  // namespace nlllab

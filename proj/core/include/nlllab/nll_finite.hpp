#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "nlllab/error.hpp"
#include "nlllab/game_model.hpp"
#include "nlllab/hamiltonian.hpp"
#include "nlllab/simplex_lattice.hpp"
#include "nlllab/transition_kernel.hpp"
#include "nlllab/types.hpp"

namespace nlllab {

enum class InitKind { Reference, Random };

struct FixedPointOptions {
  double eps_fp = 1e-11;
  int max_outer = 500;
  double damping = 0.5;  // weight on the new iterate when the map is not contractive
  InnerOptions inner;
  int workers = 1;  // 0 = all cores
  InitKind init = InitKind::Reference;
  std::uint64_t seed = 0;  // used by InitKind::Random
};

struct FixedPointReport {
  int step = -1;  // backward time index, -1 for a standalone one-step solve
  int iterations = 0;
  double residual = 0.0;  // max over nodes of |Φ(α) - α|_1 at the last iterate
  double contraction_estimate = 0.0;
  bool contractive = false;  // h L_φ < γ
  double L_phi = 0.0;
  bool damped = false;
  std::vector<double> residual_history;
};

/// Non-convergence of a fixed-point loop; carries its report.
class FixedPointError : public SolverError {
 public:
  FixedPointError(const std::string& what, FixedPointReport report)
      : SolverError(what), report_(std::move(report)) {}
  const FixedPointReport& report() const { return report_; }

 private:
  FixedPointReport report_;
};

/// m · max_x max over elementary moves z -> z + e_w - e_y of |φ(x,z') - φ(x,z)| / (2/n).
double estimate_grid_lipschitz(const NodeValues& phi, const SimplexLattice& lattice, int m);
double estimate_grid_lipschitz(const std::function<double(State, const Counts&)>& phi, int N,
                               int d, int m);

/// max_x max over elementary moves of |α(x,z') - α(x,z)|_1 / (2/n), without the m factor.
double policy_grid_lipschitz(const NodePolicy& alpha, const SimplexLattice& lattice);

struct OneStepResult {
  NodePolicy alpha;
  FixedPointReport report;
};

/// Fixed point α(x,z) = argmin_a H(x, z, E(x, z, φ, α), a) by Jacobi iteration
/// from the reference control (or a seeded random admissible start). Damped
/// with the configured weight when h L_φ >= γ.
OneStepResult solve_one_step(const GameSpec& spec, double h, const TransitionKernel& kernel,
                             const NodeValues& phi, const FixedPointOptions& opt = {});
OneStepResult solve_one_step(const GameSpec& spec, double h, int N, const NodeValues& phi,
                             const FixedPointOptions& opt = {});

struct NllSolution {
  int N = 0;
  TimeGrid grid;
  std::shared_ptr<const TransitionKernel> kernel;
  std::vector<NodeValues> value;   // k = 0..K
  std::vector<NodePolicy> policy;  // k = 0..K-1
  std::vector<FixedPointReport> reports;

  const SimplexLattice& lattice() const { return kernel->lattice(); }
};

NodeValues terminal_values(const GameSpec& spec, const SimplexLattice& lattice);

/// Backward recursion over k = K-1..0. FixedPointError messages name the step.
NllSolution solve_nll(const GameSpec& spec, const TimeGrid& grid, int N,
                      const FixedPointOptions& opt = {});

struct EquilibriumCheck {
  double gap = 0.0;                      // max over (k, x, z) of J - V
  std::vector<NodeValues> policy_value;  // J(α; α)
  std::vector<NodeValues> best_response; // V^α
};

/// Tagged-player best response against the frozen population policy versus
/// the value of following it. `cache` memoizes the population laws.
EquilibriumCheck verify_equilibrium(const GameSpec& spec, const TimeGrid& grid,
                                    const TransitionKernel& kernel,
                                    const std::vector<NodePolicy>& alpha,
                                    const FixedPointOptions& opt = {}, LawCache* cache = nullptr);

/// Piecewise-linear extension of a node table to the whole simplex.
class ValueInterpolant {
 public:
  ValueInterpolant(std::vector<NodeValues> values, std::shared_ptr<const SimplexLattice> lattice);
  double operator()(int k, State x, VecView mu) const;

 private:
  std::vector<NodeValues> values_;
  std::shared_ptr<const SimplexLattice> lattice_;
};

ValueInterpolant interpolate_value_to_simplex(const NllSolution& sol);

}  // namespace nlllab

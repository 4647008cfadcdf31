#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "nlllab/game_model.hpp"
#include "nlllab/nll_finite.hpp"
#include "nlllab/simplex_lattice.hpp"

namespace nlllab {

/// φ(y, μ) for arbitrary μ in the simplex.
using MeasureFunction = std::function<double(State y, VecView mu)>;

/// Default simplex resolution: 64 for d = 2, 16 for d = 3, and the largest
/// resolution under 20000 nodes beyond that.
int default_resolution(int d);

/// ν_j = Σ_y μ_y rows[y]_j.
Vec pushforward(VecView mu, const std::vector<Vec>& rows);

struct MFOneStepResult {
  std::vector<Vec> alpha;  // d rows, row x admissible for state x
  FixedPointReport report;
};

/// Fixed point α(x) = argmin_a H(x, μ, (φ(y, μ·α))_y, a). `lipschitz` is the
/// constant L_φ used for the contraction test h L_φ < γ.
MFOneStepResult solve_mf_one_step(const GameSpec& spec, double h, const MeasureFunction& phi,
                                  double lipschitz, VecView mu,
                                  const FixedPointOptions& opt = {});

struct MFSolution {
  TimeGrid grid;
  std::shared_ptr<const SimplexLattice> lattice;
  std::vector<NodeValues> value;   // k = 0..K
  std::vector<NodePolicy> policy;  // k = 0..K-1
  std::vector<FixedPointReport> reports;  // per step, worst case over nodes

  double value_at(int k, State x, VecView mu) const;
  /// Interpolated rows re-projected into the admissible sets.
  std::vector<Vec> policy_at(const GameSpec& spec, int k, VecView mu) const;
};

/// Backward sweep on the simplex lattice; the continuation V(k+1) is evaluated
/// at pushforwards by barycentric interpolation.
MFSolution solve_mf_nll(const GameSpec& spec, const TimeGrid& grid,
                        std::shared_ptr<const SimplexLattice> sgrid,
                        const FixedPointOptions& opt = {});

struct MeasureFlow {
  int t0 = 0;
  std::vector<Vec> mu;      // μ_{t0}, ..., μ_K
  std::vector<Vec> values;  // v*(s, .) = V(s, ., μ_s)
  std::vector<std::vector<Vec>> policy;  // rows used at s = t0..K-1
  std::uint64_t policy_fingerprint = 0;
};

MeasureFlow mfg_flow(const GameSpec& spec, const MFSolution& sol, int t0, VecView mu0);

struct MfgEquilibrium {
  std::vector<Vec> mu;
  std::vector<Vec> values;
  std::vector<std::vector<Vec>> policy;
  int iterations = 0;
  double residual = 0.0;
};

struct MfgSystemResult {
  std::vector<MfgEquilibrium> equilibria;
  int dropped = 0;  // starts that did not converge
};

struct MfgSystemOptions {
  double damping = 0.5;
  double tol = 1e-10;
  int max_iter = 5000;
  double dedup = 1e-6;
  InnerOptions inner;
};

/// Dynamic programming given the flow (v, α).
void mfg_best_response(const GameSpec& spec, const TimeGrid& grid, int t0,
                       const std::vector<Vec>& flow, const InnerOptions& inner,
                       std::vector<Vec>& values, std::vector<std::vector<Vec>>& policy);

/// Damped Picard iteration on measure flows from `starts` random initial flows.
MfgSystemResult solve_mfg_system(const GameSpec& spec, const TimeGrid& grid, int t0, VecView mu0,
                                 int starts, std::mt19937_64& rng,
                                 const MfgSystemOptions& opt = {});

}  // namespace nlllab

#pragma once

#include <random>
#include <span>

#include "nlllab/game_model.hpp"

namespace nlllab {

/// H(x, μ, v, a) = running(x, μ, a/h) h + a·v over a in `adm`.
struct HamiltonianProblem {
  State x;
  VecView mu;
  VecView v;
  double h;
  const AdmissibleSet& adm;
  const CostModel& cost;
};

struct InnerOptions {
  double eps = 1e-10;    // Frank-Wolfe gap at the returned point
  int max_iter = 10000;  // projected-gradient iterations
};

struct HamiltonianResult {
  Vec a;
  double value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

double hamiltonian_value(const HamiltonianProblem& p, VecView a);

/// max over admissible a' of (∇_a H)·(a - a'): zero exactly at the minimizer,
/// and an upper bound on H(a) - min H.
double kkt_residual(const HamiltonianProblem& p, VecView a);

/// Unique minimizer of H. Quadratic costs use an exact projection; other costs
/// run projected gradient with step 1/curvature_bound(h). SolverError when the
/// residual stays above eps after max_iter iterations.
HamiltonianResult minimize_hamiltonian(const HamiltonianProblem& p, const InnerOptions& opt = {});

/// Euclidean projection of y onto {a : Σ_S a = mass, a >= lb on S, a = 0 off S}.
/// FeasibilityError when lb |S| > mass.
Vec project_simplex_lb(VecView y, double lb, std::span<const State> support, double mass = 1.0);

struct ArgminAudit {
  double max_ratio = 0.0;      // max |Δa|_1 / |Δv|_1
  double max_ratio_inf = 0.0;  // max |Δa|_1 / |Δv|_inf
  double bound = 0.0;          // h / γ
  int pairs = 0;               // pairs with Δv != 0
};

/// Random continuation-value pairs with entries in [-scale, scale] at the
/// uniform μ; measures the displacement of the minimizer.
ArgminAudit argmin_lipschitz_audit(const GameSpec& spec, double h, State x, int trials,
                                   std::mt19937_64& rng, double scale = 1.0);

}  // namespace nlllab

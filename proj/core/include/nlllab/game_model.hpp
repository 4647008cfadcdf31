#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlllab/types.hpp"

namespace nlllab {

/// {a in simplex : a_y >= lower_bound on support, a_y = 0 off support}.
struct AdmissibleSet {
  int d = 0;
  std::vector<State> support;  // sorted, unique
  double lower_bound = 0.0;

  bool contains(VecView a, double tol = 1e-12) const;
  bool in_support(State y) const;
  /// The |support| vertices of the polytope.
  std::vector<Vec> vertices() const;
  /// Random point: uniform lower bounds plus a flat-Dirichlet split of the free mass.
  Vec random_point(std::mt19937_64& rng) const;
  /// Free mass 1 - |support| * lower_bound.
  double slack() const { return 1.0 - static_cast<double>(support.size()) * lower_bound; }
};

/// Running cost ℓ(x, μ, rate) and terminal cost g(x, μ). The running cost is
/// evaluated at the rate vector a / h; the x-coordinate of the rate is ignored.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual std::string kind() const = 0;
  virtual std::map<std::string, double> params() const = 0;

  virtual double running(State x, VecView mu, VecView rate) const = 0;
  /// One element of the subdifferential of running(x, mu, .) at rate.
  virtual Vec running_subgrad(State x, VecView mu, VecView rate) const = 0;
  virtual double terminal(State x, VecView mu) const = 0;

  /// Admissible control with bounded per-step running cost: the lower bound on
  /// every supported y != x and the remaining mass kept at x (or spread evenly
  /// over the support when x itself is not supported).
  virtual Vec reference_control(State x, VecView mu, double h, const AdmissibleSet& adm) const;

  /// c when running(x, μ, r) = c/2 Σ_{y != x} r_y^2 + f(x, μ); enables the
  /// closed-form Hamiltonian minimizer.
  virtual std::optional<double> quadratic_weight() const { return std::nullopt; }

  /// Upper bound on the curvature of a -> running(x, μ, a/h) h over the simplex.
  virtual double curvature_bound(double h) const = 0;

  /// argmin over r >= floor of the y-coordinate part of the running cost plus
  /// r * dv. Requires a cost that is separable across coordinates and
  /// independent of the rate at x; others throw DomainError.
  virtual double separable_rate_argmin(State x, VecView mu, State y, double dv,
                                       double floor) const;
};

/// Static data of a symmetric finite-state game.
struct GameSpec {
  int d = 0;
  std::vector<std::vector<State>> supports;
  double sigma2 = 0.0;
  std::shared_ptr<const CostModel> cost;
  double gamma = 0.0;
  double lip_ell = 0.0;
  double lip_g = 0.0;
  double lip_dell = 0.0;
  int m = 0;

  /// Normalizes supports (sort, dedupe), recomputes m and checks every
  /// invariant. Throws ConfigError.
  void validate();
};

/// Uniform time grid on integer indices 0..K.
struct TimeGrid {
  double h = 0.0;
  int K = 0;

  TimeGrid() = default;
  TimeGrid(double step, int steps);
  double time(int k) const { return static_cast<double>(k) * h; }
  double T() const { return static_cast<double>(K) * h; }
};

/// Counts of N untagged players over d states.
struct EmpiricalDist {
  Counts counts;
  int N() const;
  Vec point() const;
};

AdmissibleSet admissible_set(const GameSpec& spec, double h, State x);

struct QuadraticCouplings {
  double c = 1.0;          // rate penalty weight
  double kappa_g = 1.0;    // terminal cost kappa_g (1 - μ_x)
  double kappa_ell = 0.0;  // running congestion kappa_ell μ_x
};

/// Nearest-neighbor model on the cycle Z/dZ with quadratic rate penalty.
GameSpec build_quadratic_nearest_neighbor(int d, double sigma2,
                                          const QuadraticCouplings& couplings = {});

/// Same support structure as the nearest-neighbor model with an added quartic
/// rate term lambda/4 Σ r_y^4; exercises the generic Hamiltonian solver.
GameSpec build_quartic_nearest_neighbor(int d, double sigma2, double lambda,
                                        const QuadraticCouplings& couplings = {});

struct LipschitzBudget {
  std::vector<double> L;  // L(0..K)
  double M = 0.0;
  double M_tilde = 0.0;
  double h_star = 0.0;
  double T_star = 0.0;
  double h_star_NT = 0.0;
  double b_star = 0.0;

  bool cap_valid = false;        // M > L(0)
  bool contractive = false;      // h < h_star, i.e. γ - hM > 0
  bool within_cap = false;       // L(k) <= M for all k <= K
  bool horizon_ok = false;       // K h < T_star
  bool uniqueness_N = false;     // h < h_star_NT
};

/// L(k) = L(k-1) + h (m L_ℓ + L(k-1)(L_∂ℓ + L(k-1)) / (γ - h L(k-1))), L(0) = m L_g.
/// Entries after the first k with γ - h L(k-1) <= 0 are +inf.
std::vector<double> lipschitz_recursion(const GameSpec& spec, double h, int K);

LipschitzBudget lipschitz_budget(const GameSpec& spec, double h, int K, int N, double M);

/// max(sup g, sup running(x, μ, a*/h)) over a coarse simplex sample, a* the
/// reference control. Any value of the reference-control DP is <= b*(1 + T).
double estimate_b_star(const GameSpec& spec, double h, double T);

}  // namespace nlllab

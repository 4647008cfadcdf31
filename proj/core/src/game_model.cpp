#include "nlllab/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "nlllab/costs.hpp"
#include "nlllab/error.hpp"
#include "nlllab/simplex_lattice.hpp"

namespace nlllab {

bool AdmissibleSet::in_support(State y) const {
  return std::binary_search(support.begin(), support.end(), y);
}

bool AdmissibleSet::contains(VecView a, double tol) const {
  if (a.size() != static_cast<std::size_t>(d)) return false;
  double sum = 0.0;
  for (int y = 0; y < d; ++y) {
    const double ay = a[static_cast<std::size_t>(y)];
    if (!std::isfinite(ay)) return false;
    if (in_support(y)) {
      if (ay < lower_bound - tol) return false;
    } else if (std::abs(ay) > tol) {
      return false;
    }
    sum += ay;
  }
  return std::abs(sum - 1.0) <= tol * std::max(1, d);
}

std::vector<Vec> AdmissibleSet::vertices() const {
  std::vector<Vec> out;
  out.reserve(support.size());
  for (State s : support) {
    Vec a(static_cast<std::size_t>(d), 0.0);
    for (State y : support) a[static_cast<std::size_t>(y)] = lower_bound;
    a[static_cast<std::size_t>(s)] += slack();
    out.push_back(std::move(a));
  }
  return out;
}

Vec AdmissibleSet::random_point(std::mt19937_64& rng) const {
  std::exponential_distribution<double> e(1.0);
  Vec w(support.size());
  double total = 0.0;
  for (double& wi : w) {
    wi = e(rng);
    total += wi;
  }
  Vec a(static_cast<std::size_t>(d), 0.0);
  for (std::size_t i = 0; i < support.size(); ++i) {
    a[static_cast<std::size_t>(support[i])] = lower_bound + slack() * w[i] / total;
  }
  return a;
}

Vec CostModel::reference_control(State x, VecView /*mu*/, double /*h*/,
                                 const AdmissibleSet& adm) const {
  Vec a(static_cast<std::size_t>(adm.d), 0.0);
  if (adm.in_support(x)) {
    for (State y : adm.support) a[static_cast<std::size_t>(y)] = adm.lower_bound;
    a[static_cast<std::size_t>(x)] += adm.slack();
  } else {
    const double share = 1.0 / static_cast<double>(adm.support.size());
    for (State y : adm.support) a[static_cast<std::size_t>(y)] = share;
  }
  return a;
}

double CostModel::separable_rate_argmin(State, VecView, State, double, double) const {
  throw DomainError("cost model '" + kind() +
                    "' does not provide a coordinatewise rate minimizer");
}

void GameSpec::validate() {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (supports.size() != static_cast<std::size_t>(d)) {
    throw ConfigError("supports must list one set per state");
  }
  m = 0;
  for (int x = 0; x < d; ++x) {
    auto& s = supports[static_cast<std::size_t>(x)];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.empty()) throw ConfigError("support of state " + std::to_string(x) + " is empty");
    if (s.front() < 0 || s.back() >= d) {
      throw ConfigError("support of state " + std::to_string(x) + " has labels outside 0..d-1");
    }
    m = std::max(m, static_cast<int>(s.size()));
  }
  if (!cost) throw ConfigError("game has no cost model");
  auto check = [](double v, const char* name, bool strict) {
    if (!std::isfinite(v) || v < 0.0 || (strict && v == 0.0)) {
      throw ConfigError(std::string(name) + (strict ? " must be finite and > 0"
                                                    : " must be finite and >= 0"));
    }
  };
  check(sigma2, "sigma2", false);
  check(gamma, "gamma", true);
  check(lip_ell, "lip_ell", false);
  check(lip_g, "lip_g", false);
  check(lip_dell, "lip_dell", false);
}

TimeGrid::TimeGrid(double step, int steps) : h(step), K(steps) {
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("time step must be > 0");
  if (steps < 0) throw ConfigError("number of steps must be >= 0");
}

int EmpiricalDist::N() const { return std::accumulate(counts.begin(), counts.end(), 0); }

Vec EmpiricalDist::point() const {
  const int n = N();
  Vec p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    p[i] = n > 0 ? static_cast<double>(counts[i]) / n : 1.0 / static_cast<double>(counts.size());
  }
  return p;
}

AdmissibleSet admissible_set(const GameSpec& spec, double h, State x) {
  if (x < 0 || x >= spec.d) throw DomainError("state label out of range");
  AdmissibleSet adm;
  adm.d = spec.d;
  adm.support = spec.supports[static_cast<std::size_t>(x)];
  adm.lower_bound = h * spec.sigma2;
  const double need = adm.lower_bound * static_cast<double>(adm.support.size());
  if (need > 1.0 + 1e-15) {
    throw FeasibilityError("admissible set at state " + std::to_string(x) +
                           " is empty: h*sigma2*|S(x)| = " + std::to_string(need) + " > 1");
  }
  return adm;
}

namespace {

GameSpec nearest_neighbor_shell(int d, double sigma2, const QuadraticCouplings& k) {
  if (d < 2) throw ConfigError("nearest-neighbor model needs d >= 2");
  GameSpec spec;
  spec.d = d;
  spec.sigma2 = sigma2;
  spec.supports.resize(static_cast<std::size_t>(d));
  for (int x = 0; x < d; ++x) {
    spec.supports[static_cast<std::size_t>(x)] = {(x + d - 1) % d, x, (x + 1) % d};
  }
  // Strong convexity in the |.|_1 |.|_inf sense of c/2 Σ_{y != x} a_y^2 on
  // equal-mass pairs: 1/(6√3) per unit weight with two movable coordinates,
  // 1/4 when only one off-diagonal coordinate exists.
  spec.gamma = d == 2 ? k.c / 4.0 : k.c / (6.0 * std::sqrt(3.0));
  spec.lip_ell = k.kappa_ell / 2.0;
  spec.lip_g = k.kappa_g / 2.0;
  spec.lip_dell = 0.0;
  return spec;
}

}  // namespace

GameSpec build_quadratic_nearest_neighbor(int d, double sigma2, const QuadraticCouplings& k) {
  GameSpec spec = nearest_neighbor_shell(d, sigma2, k);
  spec.cost = std::make_shared<QuadraticRateCost>(k);
  spec.validate();
  return spec;
}

GameSpec build_quartic_nearest_neighbor(int d, double sigma2, double lambda,
                                        const QuadraticCouplings& k) {
  GameSpec spec = nearest_neighbor_shell(d, sigma2, k);
  spec.cost = std::make_shared<QuarticRateCost>(k, lambda);
  spec.validate();
  return spec;
}

std::vector<double> lipschitz_recursion(const GameSpec& spec, double h, int K) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> L(static_cast<std::size_t>(K) + 1, inf);
  L[0] = spec.m * spec.lip_g;
  for (int k = 1; k <= K; ++k) {
    const double prev = L[static_cast<std::size_t>(k - 1)];
    const double denom = spec.gamma - h * prev;
    if (!(denom > 0.0)) break;
    L[static_cast<std::size_t>(k)] =
        prev + h * (spec.m * spec.lip_ell + prev * (spec.lip_dell + prev) / denom);
  }
  return L;
}

LipschitzBudget lipschitz_budget(const GameSpec& spec, double h, int K, int N, double M) {
  const double inf = std::numeric_limits<double>::infinity();
  LipschitzBudget b;
  b.L = lipschitz_recursion(spec, h, K);
  b.M = M;
  b.cap_valid = M > b.L[0];
  b.h_star = M > 0.0 ? spec.gamma / M : inf;
  const double denom = spec.gamma - h * M;
  b.contractive = denom > 0.0;
  b.M_tilde = b.contractive ? spec.m * spec.lip_ell + M * (spec.lip_dell + M) / denom : inf;
  if (b.cap_valid) {
    b.T_star = b.M_tilde > 0.0 ? (M - b.L[0]) / b.M_tilde : inf;
  }
  b.within_cap = std::all_of(b.L.begin(), b.L.end(), [M](double l) { return l <= M; });
  const double T = static_cast<double>(K) * h;
  b.horizon_ok = T < b.T_star;
  b.b_star = estimate_b_star(spec, h, T);
  const double denom_nt = 2.0 * spec.m * static_cast<double>(N) * b.b_star * (1.0 + T);
  b.h_star_NT = denom_nt > 0.0 ? spec.gamma / denom_nt : inf;
  b.uniqueness_N = h < b.h_star_NT;
  return b;
}

double estimate_b_star(const GameSpec& spec, double h, double /*T*/) {
  int R = 8;
  while (R > 1 && lattice_size(R, spec.d) > 5000) --R;
  const SimplexLattice grid(R, spec.d);
  double sup_g = 0.0;
  double sup_l = 0.0;
  std::vector<AdmissibleSet> adm;
  for (int x = 0; x < spec.d; ++x) adm.push_back(admissible_set(spec, h, x));
  Vec rate(static_cast<std::size_t>(spec.d));
  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto mu = grid.point(node);
    for (int x = 0; x < spec.d; ++x) {
      sup_g = std::max(sup_g, spec.cost->terminal(x, mu));
      const Vec a = spec.cost->reference_control(x, mu, h, adm[static_cast<std::size_t>(x)]);
      for (std::size_t y = 0; y < a.size(); ++y) rate[y] = a[y] / h;
      sup_l = std::max(sup_l, spec.cost->running(x, mu, rate));
    }
  }
  return std::max(sup_g, sup_l);
}

}  // namespace nlllab

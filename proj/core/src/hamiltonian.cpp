#include "nlllab/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "nlllab/error.hpp"

namespace nlllab {

namespace {

Vec gradient(const HamiltonianProblem& p, VecView a) {
  Vec rate(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) rate[i] = a[i] / p.h;
  Vec g = p.cost.running_subgrad(p.x, p.mu, rate);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += p.v[i];
  return g;
}

// Clean up rounding so the output lies in the admissible set exactly up to
// floating point: clamp to the bound, zero off support, fix the sum on the
// largest coordinate.
void snap_admissible(Vec& a, const AdmissibleSet& adm) {
  for (int y = 0; y < adm.d; ++y) {
    if (!adm.in_support(y)) a[static_cast<std::size_t>(y)] = 0.0;
  }
  double sum = 0.0;
  std::size_t big = static_cast<std::size_t>(adm.support.front());
  for (State y : adm.support) {
    auto& ay = a[static_cast<std::size_t>(y)];
    ay = std::max(ay, adm.lower_bound);
    sum += ay;
    if (ay > a[big]) big = static_cast<std::size_t>(y);
  }
  a[big] += 1.0 - sum;
}

Vec quadratic_minimizer(const HamiltonianProblem& p, double c) {
  const AdmissibleSet& adm = p.adm;
  const double lb = adm.lower_bound;
  const std::size_t x = static_cast<std::size_t>(p.x);
  Vec a(static_cast<std::size_t>(adm.d), 0.0);
  if (adm.in_support(p.x)) {
    std::vector<State> others;
    for (State y : adm.support) {
      if (y != p.x) others.push_back(y);
    }
    Vec target(a.size(), 0.0);
    double sum = 0.0;
    for (State y : others) {
      const auto yi = static_cast<std::size_t>(y);
      target[yi] = -p.h * (p.v[yi] - p.v[x]) / c;
      a[yi] = std::max(target[yi], lb);
      sum += a[yi];
    }
    if (sum <= 1.0 - lb) {
      a[x] = 1.0 - sum;
    } else {
      a = project_simplex_lb(target, lb, others, 1.0 - lb);
      a[x] = lb;
    }
  } else {
    Vec target(a.size(), 0.0);
    for (State y : adm.support) {
      target[static_cast<std::size_t>(y)] = -p.h * p.v[static_cast<std::size_t>(y)] / c;
    }
    a = project_simplex_lb(target, lb, adm.support, 1.0);
  }
  snap_admissible(a, adm);
  return a;
}

}  // namespace

double hamiltonian_value(const HamiltonianProblem& p, VecView a) {
  Vec rate(a.size());
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    rate[i] = a[i] / p.h;
    dot += a[i] * p.v[i];
  }
  return p.cost.running(p.x, p.mu, rate) * p.h + dot;
}

double kkt_residual(const HamiltonianProblem& p, VecView a) {
  const Vec g = gradient(p, a);
  double ga = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ga += g[i] * a[i];
  double sum_s = 0.0;
  double min_s = std::numeric_limits<double>::infinity();
  for (State y : p.adm.support) {
    sum_s += g[static_cast<std::size_t>(y)];
    min_s = std::min(min_s, g[static_cast<std::size_t>(y)]);
  }
  const double best = p.adm.lower_bound * sum_s + p.adm.slack() * min_s;
  return std::max(0.0, ga - best);
}

HamiltonianResult minimize_hamiltonian(const HamiltonianProblem& p, const InnerOptions& opt) {
  for (std::size_t i = 0; i < p.v.size(); ++i) {
    if (!std::isfinite(p.v[i])) throw DomainError("Hamiltonian continuation value is not finite");
  }
  HamiltonianResult res;
  if (const auto c = p.cost.quadratic_weight()) {
    res.a = quadratic_minimizer(p, *c);
    res.iterations = 0;
  } else {
    const double L = p.cost.curvature_bound(p.h);
    if (!(L > 0.0) || !std::isfinite(L)) throw DomainError("cost curvature bound must be positive");
    // Accelerated projected gradient. The step follows the curvature measured
    // along each move (capped by the global bound) and momentum restarts when
    // the gradient mapping points back. Both tests use gradients only: near the
    // minimizer objective differences fall below roundoff long before the
    // residual reaches eps.
    Vec a = p.cost.reference_control(p.x, p.mu, p.h, p.adm);
    Vec y = a, step(a.size()), next;
    double Lk = std::max(L * 1e-4, std::numeric_limits<double>::min());
    double t = 1.0;
    int it = 0;
    for (; it < opt.max_iter; ++it) {
      const Vec g = gradient(p, y);
      while (true) {
        for (std::size_t i = 0; i < a.size(); ++i) step[i] = y[i] - g[i] / Lk;
        next = project_simplex_lb(step, p.adm.lower_bound, p.adm.support);
        if (Lk >= L) break;
        const Vec gn = gradient(p, next);
        double curv = 0.0, sq = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
          const double dl = next[i] - y[i];
          curv += (gn[i] - g[i]) * dl;
          sq += dl * dl;
        }
        if (sq == 0.0 || curv <= Lk * sq) break;
        Lk = std::min(std::max(2.0 * Lk, curv / sq), L);
      }
      double back = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) back += (y[i] - next[i]) * (next[i] - a[i]);
      double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if (back > 0.0) t_next = 1.0;
      const double beta = (t - 1.0) / t_next;
      const double moved = l1_distance(next, a);
      for (std::size_t i = 0; i < a.size(); ++i) y[i] = next[i] + (back > 0.0 ? 0.0 : beta) * (next[i] - a[i]);
      y = project_simplex_lb(y, p.adm.lower_bound, p.adm.support);
      a.swap(next);
      t = t_next;
      double scale = 1.0;
      for (double gi : gradient(p, a)) scale = std::max(scale, std::abs(gi));
      if (moved <= 1e-16 || kkt_residual(p, a) <= 0.01 * opt.eps * scale) break;
    }
    snap_admissible(a, p.adm);
    res.a = std::move(a);
    res.iterations = it + 1;
  }
  res.kkt_residual = kkt_residual(p, res.a);
  res.value = hamiltonian_value(p, res.a);
  // The residual scales with the gradient; compare relative to its magnitude.
  double scale = 1.0;
  for (double gi : gradient(p, res.a)) scale = std::max(scale, std::abs(gi));
  if (res.kkt_residual > opt.eps * scale) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "Hamiltonian minimization stopped with KKT residual %.3g after %d iterations",
                  res.kkt_residual, res.iterations);
    throw SolverError(msg);
  }
  return res;
}

Vec project_simplex_lb(VecView y, double lb, std::span<const State> support, double mass) {
  const double free = mass - lb * static_cast<double>(support.size());
  if (support.empty() || free < -1e-15) {
    throw FeasibilityError("projection target is empty: lower bound " + std::to_string(lb) +
                           " on " + std::to_string(support.size()) + " coordinates exceeds mass " +
                           std::to_string(mass));
  }
  Vec a(y.size(), 0.0);
  if (free <= 0.0) {
    for (State s : support) a[static_cast<std::size_t>(s)] = lb;
    return a;
  }
  // Sort-based threshold: w = y_S - lb projected onto {w >= 0, Σw = free}.
  std::vector<double> w;
  w.reserve(support.size());
  for (State s : support) w.push_back(y[static_cast<std::size_t>(s)] - lb);
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cum += sorted[k];
    const double t = (cum - free) / static_cast<double>(k + 1);
    if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
      theta = t;
      break;
    }
  }
  for (std::size_t i = 0; i < support.size(); ++i) {
    a[static_cast<std::size_t>(support[i])] = lb + std::max(w[i] - theta, 0.0);
  }
  return a;
}

ArgminAudit argmin_lipschitz_audit(const GameSpec& spec, double h, State x, int trials,
                                   std::mt19937_64& rng, double scale) {
  const AdmissibleSet adm = admissible_set(spec, h, x);
  const Vec mu(static_cast<std::size_t>(spec.d), 1.0 / spec.d);
  std::uniform_real_distribution<double> u(-scale, scale);
  ArgminAudit audit;
  audit.bound = h / spec.gamma;
  Vec v1(static_cast<std::size_t>(spec.d)), v2(static_cast<std::size_t>(spec.d));
  for (int t = 0; t < trials; ++t) {
    for (auto& e : v1) e = u(rng);
    for (auto& e : v2) e = u(rng);
    const double dv1 = l1_distance(v1, v2);
    const double dvinf = sup_distance(v1, v2);
    if (dv1 == 0.0) continue;
    const auto a1 = minimize_hamiltonian({x, mu, v1, h, adm, *spec.cost}).a;
    const auto a2 = minimize_hamiltonian({x, mu, v2, h, adm, *spec.cost}).a;
    const double da = l1_distance(a1, a2);
    audit.max_ratio = std::max(audit.max_ratio, da / dv1);
    audit.max_ratio_inf = std::max(audit.max_ratio_inf, da / dvinf);
    ++audit.pairs;
  }
  return audit;
}

}  // namespace nlllab

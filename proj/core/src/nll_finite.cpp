#include "nlllab/nll_finite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "nlllab/parallel.hpp"

namespace nlllab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<AdmissibleSet> admissible_sets(const GameSpec& spec, double h) {
  std::vector<AdmissibleSet> adm;
  adm.reserve(static_cast<std::size_t>(spec.d));
  for (int x = 0; x < spec.d; ++x) adm.push_back(admissible_set(spec, h, x));
  return adm;
}

// Iterates over all elementary moves (node, w, y) with counts(node)_y > 0, w != y.
template <class F>
void for_each_move(const SimplexLattice& lattice, F&& f) {
  const int d = lattice.dim();
  for (std::size_t node = 0; node < lattice.size(); ++node) {
    const Counts& c = lattice.counts(node);
    for (int y = 0; y < d; ++y) {
      if (c[static_cast<std::size_t>(y)] == 0) continue;
      for (int w = 0; w < d; ++w) {
        if (w == y) continue;
        f(node, *lattice.shifted(node, w, y));
      }
    }
  }
}

}  // namespace

double estimate_grid_lipschitz(const NodeValues& phi, const SimplexLattice& lattice, int m) {
  if (lattice.resolution() == 0) return 0.0;
  const double step = 2.0 / lattice.resolution();
  double lip = 0.0;
  for_each_move(lattice, [&](std::size_t a, std::size_t b) {
    for (int x = 0; x < lattice.dim(); ++x) {
      lip = std::max(lip, std::abs(phi(x, b) - phi(x, a)) / step);
    }
  });
  return m * lip;
}

double estimate_grid_lipschitz(const std::function<double(State, const Counts&)>& phi, int N,
                               int d, int m) {
  const SimplexLattice lattice(N, d);
  NodeValues table(d, lattice.size());
  for (std::size_t node = 0; node < lattice.size(); ++node) {
    for (int x = 0; x < d; ++x) table(x, node) = phi(x, lattice.counts(node));
  }
  return estimate_grid_lipschitz(table, lattice, m);
}

double policy_grid_lipschitz(const NodePolicy& alpha, const SimplexLattice& lattice) {
  if (lattice.resolution() == 0) return 0.0;
  const double step = 2.0 / lattice.resolution();
  double lip = 0.0;
  for_each_move(lattice, [&](std::size_t a, std::size_t b) {
    for (int x = 0; x < lattice.dim(); ++x) {
      lip = std::max(lip, l1_distance(alpha.row(x, b), alpha.row(x, a)) / step);
    }
  });
  return lip;
}

OneStepResult solve_one_step(const GameSpec& spec, double h, const TransitionKernel& kernel,
                             const NodeValues& phi, const FixedPointOptions& opt) {
  const SimplexLattice& lattice = kernel.lattice();
  const int d = spec.d;
  const std::size_t nodes = lattice.size();
  const auto adm = admissible_sets(spec, h);

  OneStepResult out;
  FixedPointReport& rep = out.report;
  rep.L_phi = estimate_grid_lipschitz(phi, lattice, spec.m);
  rep.contractive = h * rep.L_phi < spec.gamma;
  rep.damped = !rep.contractive;
  const double rho = rep.damped ? opt.damping : 1.0;

  NodePolicy alpha(d, nodes);
  std::mt19937_64 rng(opt.seed);
  for (int x = 0; x < d; ++x) {
    for (std::size_t node = 0; node < nodes; ++node) {
      const Vec a = opt.init == InitKind::Random
                        ? adm[static_cast<std::size_t>(x)].random_point(rng)
                        : spec.cost->reference_control(x, lattice.point(node), h,
                                                       adm[static_cast<std::size_t>(x)]);
      std::copy(a.begin(), a.end(), alpha.row(x, node).begin());
    }
  }

  NodePolicy mapped(d, nodes);
  std::vector<double> change(static_cast<std::size_t>(d) * nodes);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= opt.max_outer; ++it) {
    parallel_for(static_cast<std::size_t>(d) * nodes, opt.workers, [&](std::size_t idx) {
      const State x = static_cast<State>(idx / nodes);
      const std::size_t node = idx % nodes;
      const Vec e = kernel.expect(x, node, phi, alpha);
      const HamiltonianProblem p{x, lattice.point(node), e, h, adm[static_cast<std::size_t>(x)],
                                 *spec.cost};
      const Vec a = minimize_hamiltonian(p, opt.inner).a;
      std::copy(a.begin(), a.end(), mapped.row(x, node).begin());
      change[idx] = l1_distance(a, alpha.row(x, node));
    });
    const double res = *std::max_element(change.begin(), change.end());
    rep.iterations = it;
    rep.residual = res;
    rep.residual_history.push_back(res);
    if (it > 1 && prev > 0.0) rep.contraction_estimate = res / prev;
    prev = res;
    if (res <= opt.eps_fp) {
      out.alpha = std::move(mapped);
      return out;
    }
    if (rho == 1.0) {
      std::swap(alpha, mapped);
    } else {
      auto dst = alpha.raw();
      const auto src = mapped.raw();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = (1.0 - rho) * dst[i] + rho * src[i];
    }
  }
  throw FixedPointError("one-step fixed point did not converge: residual " +
                            std::to_string(rep.residual) + " after " +
                            std::to_string(rep.iterations) + " iterations" +
                            (rep.contractive ? "" : " (non-contractive, damped)"),
                        rep);
}

OneStepResult solve_one_step(const GameSpec& spec, double h, int N, const NodeValues& phi,
                             const FixedPointOptions& opt) {
  const TransitionKernel kernel(N, spec.d);
  return solve_one_step(spec, h, kernel, phi, opt);
}

NodeValues terminal_values(const GameSpec& spec, const SimplexLattice& lattice) {
  NodeValues g(spec.d, lattice.size());
  for (std::size_t node = 0; node < lattice.size(); ++node) {
    for (int x = 0; x < spec.d; ++x) g(x, node) = spec.cost->terminal(x, lattice.point(node));
  }
  return g;
}

NllSolution solve_nll(const GameSpec& spec, const TimeGrid& grid, int N,
                      const FixedPointOptions& opt) {
  if (N < 1) throw DomainError("population N must be >= 1");
  NllSolution sol;
  sol.N = N;
  sol.grid = grid;
  sol.kernel = std::make_shared<const TransitionKernel>(N, spec.d);
  const SimplexLattice& lattice = sol.lattice();
  const std::size_t nodes = lattice.size();
  const auto adm = admissible_sets(spec, grid.h);

  sol.value.assign(static_cast<std::size_t>(grid.K) + 1, NodeValues());
  sol.policy.assign(static_cast<std::size_t>(grid.K), NodePolicy());
  sol.reports.assign(static_cast<std::size_t>(grid.K), FixedPointReport());
  sol.value[static_cast<std::size_t>(grid.K)] = terminal_values(spec, lattice);

  for (int k = grid.K - 1; k >= 0; --k) {
    const NodeValues& next = sol.value[static_cast<std::size_t>(k) + 1];
    FixedPointOptions step_opt = opt;
    step_opt.seed = splitmix64(opt.seed ^ (static_cast<std::uint64_t>(k) << 32));
    OneStepResult os;
    try {
      os = solve_one_step(spec, grid.h, *sol.kernel, next, step_opt);
    } catch (const FixedPointError& e) {
      FixedPointReport rep = e.report();
      rep.step = k;
      throw FixedPointError("step " + std::to_string(k) + ": " + e.what(), rep);
    }
    os.report.step = k;
    NodeValues v(spec.d, nodes);
    parallel_for(static_cast<std::size_t>(spec.d) * nodes, opt.workers, [&](std::size_t idx) {
      const State x = static_cast<State>(idx / nodes);
      const std::size_t node = idx % nodes;
      const Vec e = sol.kernel->expect(x, node, next, os.alpha);
      const HamiltonianProblem p{x, lattice.point(node), e, grid.h,
                                 adm[static_cast<std::size_t>(x)], *spec.cost};
      v(x, node) = hamiltonian_value(p, os.alpha.row(x, node));
    });
    sol.value[static_cast<std::size_t>(k)] = std::move(v);
    sol.policy[static_cast<std::size_t>(k)] = std::move(os.alpha);
    sol.reports[static_cast<std::size_t>(k)] = std::move(os.report);
  }
  return sol;
}

EquilibriumCheck verify_equilibrium(const GameSpec& spec, const TimeGrid& grid,
                                    const TransitionKernel& kernel,
                                    const std::vector<NodePolicy>& alpha,
                                    const FixedPointOptions& opt, LawCache* cache) {
  if (alpha.size() != static_cast<std::size_t>(grid.K)) {
    throw DomainError("policy has " + std::to_string(alpha.size()) + " layers, expected " +
                      std::to_string(grid.K));
  }
  const SimplexLattice& lattice = kernel.lattice();
  const std::size_t nodes = lattice.size();
  const auto adm = admissible_sets(spec, grid.h);
  for (int k = 0; k < grid.K; ++k) {
    for (int x = 0; x < spec.d; ++x) {
      for (std::size_t node = 0; node < nodes; ++node) {
        if (!adm[static_cast<std::size_t>(x)].contains(alpha[static_cast<std::size_t>(k)].row(x, node), 1e-9)) {
          throw DomainError("policy is not admissible at step " + std::to_string(k));
        }
      }
    }
  }

  EquilibriumCheck out;
  out.policy_value.assign(static_cast<std::size_t>(grid.K) + 1, NodeValues());
  out.best_response.assign(static_cast<std::size_t>(grid.K) + 1, NodeValues());
  out.policy_value.back() = terminal_values(spec, lattice);
  out.best_response.back() = out.policy_value.back();
  double gap = 0.0;
  for (int k = grid.K - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const NodePolicy& a = alpha[ku];
    NodeValues J(spec.d, nodes), V(spec.d, nodes);
    parallel_for(static_cast<std::size_t>(spec.d) * nodes, opt.workers, [&](std::size_t idx) {
      const State x = static_cast<State>(idx / nodes);
      const std::size_t node = idx % nodes;
      const RankLaw law = cache ? cache->get(kernel, x, node, a) : kernel.law(x, node, a);
      const Vec eJ = kernel.expect(law, out.policy_value[ku + 1]);
      const Vec eV = kernel.expect(law, out.best_response[ku + 1]);
      const auto& ax = adm[static_cast<std::size_t>(x)];
      const HamiltonianProblem pJ{x, lattice.point(node), eJ, grid.h, ax, *spec.cost};
      const HamiltonianProblem pV{x, lattice.point(node), eV, grid.h, ax, *spec.cost};
      J(x, node) = hamiltonian_value(pJ, a.row(x, node));
      V(x, node) = minimize_hamiltonian(pV, opt.inner).value;
    });
    for (std::size_t i = 0; i < J.raw().size(); ++i) gap = std::max(gap, J.raw()[i] - V.raw()[i]);
    out.policy_value[ku] = std::move(J);
    out.best_response[ku] = std::move(V);
  }
  out.gap = gap;
  return out;
}

ValueInterpolant::ValueInterpolant(std::vector<NodeValues> values,
                                   std::shared_ptr<const SimplexLattice> lattice)
    : values_(std::move(values)), lattice_(std::move(lattice)) {}

double ValueInterpolant::operator()(int k, State x, VecView mu) const {
  const NodeValues& v = values_.at(static_cast<std::size_t>(k));
  double s = 0.0;
  for (const auto& [node, w] : lattice_->barycentric(mu)) s += w * v(x, node);
  return s;
}

ValueInterpolant interpolate_value_to_simplex(const NllSolution& sol) {
  // Aliasing constructor: the lattice lives inside the kernel.
  std::shared_ptr<const SimplexLattice> lat(sol.kernel, &sol.kernel->lattice());
  return ValueInterpolant(sol.value, std::move(lat));
}

}  // namespace nlllab

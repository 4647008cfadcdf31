#include "nlllab/cts_reference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlllab/error.hpp"
#include "nlllab/parallel.hpp"

namespace nlllab {

Vec cts_hamiltonian_min(const GameSpec& spec, State x, VecView mu, VecView dv) {
  Vec rate(static_cast<std::size_t>(spec.d), 0.0);
  double total = 0.0;
  for (State y : spec.supports[static_cast<std::size_t>(x)]) {
    if (y == x) continue;
    const double r = spec.cost->separable_rate_argmin(x, mu, y, dv[static_cast<std::size_t>(y)],
                                                      spec.sigma2);
    rate[static_cast<std::size_t>(y)] = r;
    total += r;
  }
  rate[static_cast<std::size_t>(x)] = -total;
  return rate;
}

NodeValues generator_apply(const SimplexLattice& lattice, const NodePolicy& beta,
                           const NodeValues& phi) {
  const int d = lattice.dim();
  NodeValues out(d, lattice.size(), 0.0);
  for (std::size_t node = 0; node < lattice.size(); ++node) {
    const Counts& c = lattice.counts(node);
    for (int x = 0; x < d; ++x) {
      double s = 0.0;
      for (int y = 0; y < d; ++y) {
        const int cy = c[static_cast<std::size_t>(y)];
        if (cy == 0) continue;
        const auto row = beta.row(y, *lattice.shifted(node, x, y));
        for (int w = 0; w < d; ++w) {
          if (w == y || row[static_cast<std::size_t>(w)] == 0.0) continue;
          const std::size_t moved = *lattice.shifted(node, w, y);
          s += cy * row[static_cast<std::size_t>(w)] * (phi(x, moved) - phi(x, node));
        }
      }
      out(x, node) = s;
    }
  }
  return out;
}

namespace {

struct CtsRhs {
  const GameSpec& spec;
  const SimplexLattice& lattice;
  int workers;

  NodePolicy rates(const NodeValues& v) const {
    const std::size_t nodes = lattice.size();
    NodePolicy a(spec.d, nodes);
    parallel_for(static_cast<std::size_t>(spec.d) * nodes, workers, [&](std::size_t idx) {
      const State x = static_cast<State>(idx / nodes);
      const std::size_t node = idx % nodes;
      Vec dv(static_cast<std::size_t>(spec.d));
      for (int y = 0; y < spec.d; ++y) dv[static_cast<std::size_t>(y)] = v(y, node) - v(x, node);
      const Vec r = cts_hamiltonian_min(spec, x, lattice.point(node), dv);
      std::copy(r.begin(), r.end(), a.row(x, node).begin());
    });
    return a;
  }

  // Time derivative of u(s) = v(T - s).
  NodeValues operator()(const NodeValues& v) const {
    const std::size_t nodes = lattice.size();
    const NodePolicy a = rates(v);
    NodeValues out = generator_apply(lattice, a, v);
    for (std::size_t node = 0; node < nodes; ++node) {
      for (int x = 0; x < spec.d; ++x) {
        const auto r = a.row(x, node);
        double ham = spec.cost->running(x, lattice.point(node), r);
        for (int y = 0; y < spec.d; ++y) {
          if (y != x) ham += r[static_cast<std::size_t>(y)] * (v(y, node) - v(x, node));
        }
        out(x, node) += ham;
      }
    }
    return out;
  }
};

NodeValues axpy(const NodeValues& u, double s, const NodeValues& k) {
  NodeValues out = u;
  auto o = out.raw();
  const auto kr = k.raw();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += s * kr[i];
  return out;
}

CtsSolution integrate(const GameSpec& spec, int N, double T, int M, int workers) {
  if (N < 1) throw DomainError("population N must be >= 1");
  if (!(T >= 0.0)) throw DomainError("horizon must be >= 0");
  if (M < 1) throw DomainError("integrator needs M >= 1");
  CtsSolution sol;
  sol.N = N;
  sol.T = T;
  sol.M = M;
  sol.lattice = std::make_shared<const SimplexLattice>(N, spec.d);
  const SimplexLattice& lat = *sol.lattice;
  const CtsRhs rhs{spec, lat, workers};
  const double dt = T / M;

  sol.value.assign(static_cast<std::size_t>(M) + 1, NodeValues());
  NodeValues u = terminal_values(spec, lat);
  sol.value[static_cast<std::size_t>(M)] = u;
  for (int n = 1; n <= M; ++n) {
    const NodeValues k1 = rhs(u);
    const NodeValues k2 = rhs(axpy(u, 0.5 * dt, k1));
    const NodeValues k3 = rhs(axpy(u, 0.5 * dt, k2));
    const NodeValues k4 = rhs(axpy(u, dt, k3));
    auto ur = u.raw();
    const auto r1 = k1.raw(), r2 = k2.raw(), r3 = k3.raw(), r4 = k4.raw();
    for (std::size_t i = 0; i < ur.size(); ++i) {
      ur[i] += dt / 6.0 * (r1[i] + 2.0 * r2[i] + 2.0 * r3[i] + r4[i]);
      if (!std::isfinite(ur[i])) throw SolverError("continuous-time solution blew up");
    }
    sol.value[static_cast<std::size_t>(M - n)] = u;
  }
  sol.rate.reserve(sol.value.size());
  for (const auto& v : sol.value) sol.rate.push_back(rhs.rates(v));
  return sol;
}

}  // namespace

CtsSolution solve_cts_nll(const GameSpec& spec, int N, double T, const CtsOptions& opt) {
  CtsSolution sol = integrate(spec, N, T, opt.M, opt.workers);
  if (opt.halving_tol) {
    const CtsSolution fine = integrate(spec, N, T, 2 * opt.M, opt.workers);
    const double diff = sup_distance(sol.value.front().raw(), fine.value.front().raw());
    if (diff > *opt.halving_tol) {
      throw AccuracyError("step halving changed v(0) by " + std::to_string(diff) +
                          " > tolerance " + std::to_string(*opt.halving_tol));
    }
  }
  return sol;
}

std::vector<DiscreteVsCtsRow> compare_discrete_to_cts(const GameSpec& spec, int N, double T,
                                                      const std::vector<int>& K_list,
                                                      const CtsSolution& ref,
                                                      const FixedPointOptions& opt) {
  if (ref.N != N || ref.T != T) throw DomainError("reference solves a different instance");
  const SimplexLattice& lat = *ref.lattice;
  const std::size_t nodes = lat.size();
  const int d = spec.d;
  const long M = ref.M;
  std::vector<DiscreteVsCtsRow> rows;
  for (int K : K_list) {
    if (K < 1) throw DomainError("K must be >= 1");
    const TimeGrid grid(T / K, K);
    const NllSolution disc = solve_nll(spec, grid, N, opt);
    DiscreteVsCtsRow row;
    row.K = K;
    row.h = grid.h;
    auto layer = [&](int k) -> const NodePolicy& {
      return disc.policy[static_cast<std::size_t>(std::min(k, K - 1))];
    };
    for (long j = 0; j <= M; ++j) {
      const long num = j * K;
      const int k = static_cast<int>(num / M);
      const double frac = static_cast<double>(num % M) / static_cast<double>(M);
      const int k1 = std::min(k + 1, K);
      const NodeValues& v0 = disc.value[static_cast<std::size_t>(k)];
      const NodeValues& v1 = disc.value[static_cast<std::size_t>(k1)];
      const NodePolicy& a0 = layer(k);
      const NodePolicy& a1 = layer(k1);
      const NodeValues& vr = ref.value[static_cast<std::size_t>(j)];
      const NodePolicy& rr = ref.rate[static_cast<std::size_t>(j)];
      for (int x = 0; x < d; ++x) {
        for (std::size_t node = 0; node < nodes; ++node) {
          const double v = (1.0 - frac) * v0(x, node) + frac * v1(x, node);
          row.err_value = std::max(row.err_value, std::abs(v - vr(x, node)));
          const auto p0 = a0.row(x, node), p1 = a1.row(x, node), pr = rr.row(x, node);
          for (int y = 0; y < d; ++y) {
            const double ex = y == x ? 1.0 : 0.0;
            const auto yu = static_cast<std::size_t>(y);
            const double a = (1.0 - frac) * p0[yu] + frac * p1[yu];
            row.err_rate = std::max(row.err_rate, std::abs((a - ex) / grid.h - pr[yu]));
          }
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nlllab

#include "nlllab/nll_mean_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nlllab/error.hpp"
#include "nlllab/game_io.hpp"
#include "nlllab/hamiltonian.hpp"
#include "nlllab/parallel.hpp"

namespace nlllab {

namespace {

std::vector<AdmissibleSet> admissible_sets(const GameSpec& spec, double h) {
  std::vector<AdmissibleSet> adm;
  for (int x = 0; x < spec.d; ++x) adm.push_back(admissible_set(spec, h, x));
  return adm;
}

FixedPointReport merge_reports(const std::vector<FixedPointReport>& reps) {
  FixedPointReport out;
  out.contractive = true;
  for (const auto& r : reps) {
    out.iterations = std::max(out.iterations, r.iterations);
    out.residual = std::max(out.residual, r.residual);
    out.contraction_estimate = std::max(out.contraction_estimate, r.contraction_estimate);
    out.contractive = out.contractive && r.contractive;
    out.L_phi = std::max(out.L_phi, r.L_phi);
    out.damped = out.damped || r.damped;
  }
  return out;
}

double flow_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double dist = 0.0;
  for (std::size_t s = 0; s < a.size(); ++s) dist = std::max(dist, l1_distance(a[s], b[s]));
  return dist;
}

}  // namespace

int default_resolution(int d) {
  if (d <= 2) return 64;
  if (d == 3) return 16;
  int R = 16;
  while (R > 1 && lattice_size(R, d) > 20000) --R;
  return R;
}

Vec pushforward(VecView mu, const std::vector<Vec>& rows) {
  const std::size_t d = mu.size();
  Vec nu(d, 0.0);
  for (std::size_t y = 0; y < d; ++y) {
    for (std::size_t j = 0; j < d; ++j) nu[j] += mu[y] * rows[y][j];
  }
  return nu;
}

MFOneStepResult solve_mf_one_step(const GameSpec& spec, double h, const MeasureFunction& phi,
                                  double lipschitz, VecView mu, const FixedPointOptions& opt) {
  const auto adm = admissible_sets(spec, h);
  const auto d = static_cast<std::size_t>(spec.d);
  MFOneStepResult out;
  FixedPointReport& rep = out.report;
  rep.L_phi = lipschitz;
  rep.contractive = h * lipschitz < spec.gamma;
  rep.damped = !rep.contractive;
  const double rho = rep.damped ? opt.damping : 1.0;

  std::vector<Vec> rows(d);
  std::mt19937_64 rng(opt.seed);
  for (std::size_t x = 0; x < d; ++x) {
    rows[x] = opt.init == InitKind::Random
                  ? adm[x].random_point(rng)
                  : spec.cost->reference_control(static_cast<State>(x), mu, h, adm[x]);
  }
  std::vector<Vec> mapped(d);
  Vec e(d);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int it = 1; it <= opt.max_outer; ++it) {
    const Vec nu = pushforward(mu, rows);
    for (std::size_t y = 0; y < d; ++y) e[y] = phi(static_cast<State>(y), nu);
    double res = 0.0;
    for (std::size_t x = 0; x < d; ++x) {
      const HamiltonianProblem p{static_cast<State>(x), mu, e, h, adm[x], *spec.cost};
      mapped[x] = minimize_hamiltonian(p, opt.inner).a;
      res = std::max(res, l1_distance(mapped[x], rows[x]));
    }
    rep.iterations = it;
    rep.residual = res;
    rep.residual_history.push_back(res);
    if (it > 1 && prev > 0.0) rep.contraction_estimate = res / prev;
    prev = res;
    if (res <= opt.eps_fp) {
      out.alpha = std::move(mapped);
      return out;
    }
    for (std::size_t x = 0; x < d; ++x) {
      for (std::size_t j = 0; j < d; ++j) {
        rows[x][j] = (1.0 - rho) * rows[x][j] + rho * mapped[x][j];
      }
    }
  }
  throw FixedPointError("mean-field one-step fixed point did not converge: residual " +
                            std::to_string(rep.residual) + " after " +
                            std::to_string(rep.iterations) + " iterations",
                        rep);
}

double MFSolution::value_at(int k, State x, VecView mu) const {
  const NodeValues& v = value.at(static_cast<std::size_t>(k));
  double s = 0.0;
  for (const auto& [node, w] : lattice->barycentric(mu)) s += w * v(x, node);
  return s;
}

std::vector<Vec> MFSolution::policy_at(const GameSpec& spec, int k, VecView mu) const {
  const NodePolicy& a = policy.at(static_cast<std::size_t>(k));
  const auto d = static_cast<std::size_t>(spec.d);
  const auto weights = lattice->barycentric(mu);
  std::vector<Vec> rows(d, Vec(d, 0.0));
  for (std::size_t x = 0; x < d; ++x) {
    for (const auto& [node, w] : weights) {
      const auto r = a.row(static_cast<State>(x), node);
      for (std::size_t j = 0; j < d; ++j) rows[x][j] += w * r[j];
    }
    const AdmissibleSet adm = admissible_set(spec, grid.h, static_cast<State>(x));
    rows[x] = project_simplex_lb(rows[x], adm.lower_bound, adm.support);
  }
  return rows;
}

MFSolution solve_mf_nll(const GameSpec& spec, const TimeGrid& grid,
                        std::shared_ptr<const SimplexLattice> sgrid,
                        const FixedPointOptions& opt) {
  if (sgrid->dim() != spec.d) throw DomainError("simplex grid dimension differs from the game");
  MFSolution sol;
  sol.grid = grid;
  sol.lattice = std::move(sgrid);
  const SimplexLattice& lat = *sol.lattice;
  const std::size_t nodes = lat.size();
  const auto adm = admissible_sets(spec, grid.h);

  sol.value.assign(static_cast<std::size_t>(grid.K) + 1, NodeValues());
  sol.policy.assign(static_cast<std::size_t>(grid.K), NodePolicy());
  sol.reports.assign(static_cast<std::size_t>(grid.K), FixedPointReport());
  sol.value.back() = terminal_values(spec, lat);

  for (int k = grid.K - 1; k >= 0; --k) {
    const auto ku = static_cast<std::size_t>(k);
    const NodeValues& next = sol.value[ku + 1];
    const double lip = estimate_grid_lipschitz(next, lat, spec.m);
    const MeasureFunction phi = [&](State y, VecView nu) {
      double s = 0.0;
      for (const auto& [node, w] : lat.barycentric(nu)) s += w * next(y, node);
      return s;
    };
    NodeValues v(spec.d, nodes);
    NodePolicy a(spec.d, nodes);
    std::vector<FixedPointReport> reps(nodes);
    parallel_for(nodes, opt.workers, [&](std::size_t node) {
      const auto mu = lat.point(node);
      MFOneStepResult os;
      try {
        os = solve_mf_one_step(spec, grid.h, phi, lip, mu, opt);
      } catch (const FixedPointError& e) {
        FixedPointReport rep = e.report();
        rep.step = k;
        throw FixedPointError("step " + std::to_string(k) + ", node " + std::to_string(node) +
                                  ": " + e.what(),
                              rep);
      }
      const Vec nu = pushforward(mu, os.alpha);
      Vec e(static_cast<std::size_t>(spec.d));
      for (int y = 0; y < spec.d; ++y) e[static_cast<std::size_t>(y)] = phi(y, nu);
      for (int x = 0; x < spec.d; ++x) {
        const auto& row = os.alpha[static_cast<std::size_t>(x)];
        const HamiltonianProblem p{x, mu, e, grid.h, adm[static_cast<std::size_t>(x)], *spec.cost};
        v(x, node) = hamiltonian_value(p, row);
        std::copy(row.begin(), row.end(), a.row(x, node).begin());
      }
      reps[node] = std::move(os.report);
    });
    sol.value[ku] = std::move(v);
    sol.policy[ku] = std::move(a);
    sol.reports[ku] = merge_reports(reps);
    sol.reports[ku].step = k;
  }
  return sol;
}

MeasureFlow mfg_flow(const GameSpec& spec, const MFSolution& sol, int t0, VecView mu0) {
  const int K = sol.grid.K;
  if (t0 < 0 || t0 > K) throw DomainError("flow start index outside 0..K");
  MeasureFlow flow;
  flow.t0 = t0;
  flow.mu.emplace_back(mu0.begin(), mu0.end());
  for (int s = t0; s <= K; ++s) {
    const Vec& cur = flow.mu.back();
    Vec vals(static_cast<std::size_t>(spec.d));
    for (int x = 0; x < spec.d; ++x) vals[static_cast<std::size_t>(x)] = sol.value_at(s, x, cur);
    flow.values.push_back(std::move(vals));
    if (s == K) break;
    auto rows = sol.policy_at(spec, s, cur);
    Vec next = pushforward(cur, rows);
    flow.policy.push_back(std::move(rows));
    flow.mu.push_back(std::move(next));
  }
  std::string bytes;
  for (const auto& p : sol.policy) {
    bytes.append(reinterpret_cast<const char*>(p.raw().data()), p.raw().size() * sizeof(double));
  }
  flow.policy_fingerprint = fnv1a64(bytes);
  return flow;
}

void mfg_best_response(const GameSpec& spec, const TimeGrid& grid, int t0,
                       const std::vector<Vec>& flow, const InnerOptions& inner,
                       std::vector<Vec>& values, std::vector<std::vector<Vec>>& policy) {
  const auto d = static_cast<std::size_t>(spec.d);
  const std::size_t len = flow.size();
  if (len != static_cast<std::size_t>(grid.K - t0 + 1)) {
    throw DomainError("flow length does not match the time window");
  }
  values.assign(len, Vec(d));
  policy.assign(len - 1, std::vector<Vec>(d));
  for (std::size_t x = 0; x < d; ++x) {
    values[len - 1][x] = spec.cost->terminal(static_cast<State>(x), flow[len - 1]);
  }
  for (std::size_t i = len - 1; i-- > 0;) {
    for (std::size_t x = 0; x < d; ++x) {
      const AdmissibleSet adm = admissible_set(spec, grid.h, static_cast<State>(x));
      const HamiltonianProblem p{static_cast<State>(x), flow[i], values[i + 1], grid.h, adm,
                                 *spec.cost};
      const HamiltonianResult r = minimize_hamiltonian(p, inner);
      policy[i][x] = r.a;
      values[i][x] = r.value;
    }
  }
}

MfgSystemResult solve_mfg_system(const GameSpec& spec, const TimeGrid& grid, int t0, VecView mu0,
                                 int starts, std::mt19937_64& rng, const MfgSystemOptions& opt) {
  if (t0 < 0 || t0 > grid.K) throw DomainError("flow start index outside 0..K");
  const auto d = static_cast<std::size_t>(spec.d);
  const std::size_t len = static_cast<std::size_t>(grid.K - t0) + 1;
  MfgSystemResult out;
  std::exponential_distribution<double> expo(1.0);

  auto accept = [&](MfgEquilibrium eq) {
    for (const auto& other : out.equilibria) {
      if (flow_distance(other.mu, eq.mu) <= opt.dedup) return;
    }
    out.equilibria.push_back(std::move(eq));
  };

  for (int start = 0; start < std::max(starts, 1); ++start) {
    std::vector<Vec> flow(len);
    flow[0].assign(mu0.begin(), mu0.end());
    for (std::size_t s = 1; s < len; ++s) {
      Vec m(d);
      double tot = 0.0;
      for (auto& mi : m) tot += (mi = expo(rng));
      for (auto& mi : m) mi /= tot;
      flow[s] = std::move(m);
    }
    MfgEquilibrium eq;
    bool converged = false;
    std::vector<Vec> mapped(len);
    for (int it = 1; it <= opt.max_iter; ++it) {
      mfg_best_response(spec, grid, t0, flow, opt.inner, eq.values, eq.policy);
      mapped[0] = flow[0];
      double res = 0.0;
      for (std::size_t s = 0; s + 1 < len; ++s) {
        mapped[s + 1] = pushforward(flow[s], eq.policy[s]);
        res = std::max(res, l1_distance(mapped[s + 1], flow[s + 1]));
      }
      eq.iterations = it;
      eq.residual = res;
      if (res <= opt.tol) {
        converged = true;
        break;
      }
      for (std::size_t s = 1; s < len; ++s) {
        for (std::size_t j = 0; j < d; ++j) {
          flow[s][j] = (1.0 - opt.damping) * flow[s][j] + opt.damping * mapped[s][j];
        }
      }
    }
    if (!converged) {
      ++out.dropped;
      continue;
    }
    eq.mu = std::move(flow);
    accept(std::move(eq));
  }
  return out;
}

}  // namespace nlllab

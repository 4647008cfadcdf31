#include "nlllab/transition_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "nlllab/error.hpp"
#include "nlllab/game_io.hpp"

namespace nlllab {

namespace {

std::string counts_str(const Counts& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c[i]);
  }
  return s + ")";
}

Counts shifted_counts(const Counts& z, State x, State y) {
  Counts s = z;
  if (x != y) {
    ++s[static_cast<std::size_t>(x)];
    --s[static_cast<std::size_t>(y)];
  }
  return s;
}

std::vector<State> default_order(int d, std::span<const State> order) {
  if (!order.empty()) {
    std::vector<State> o(order.begin(), order.end());
    std::vector<State> check = o;
    std::sort(check.begin(), check.end());
    for (int i = 0; i < d; ++i) {
      if (check.size() != static_cast<std::size_t>(d) || check[static_cast<std::size_t>(i)] != i) {
        throw DomainError("convolution order must be a permutation of 0..d-1");
      }
    }
    return o;
  }
  std::vector<State> o(static_cast<std::size_t>(d));
  std::iota(o.begin(), o.end(), 0);
  return o;
}

}  // namespace

void check_simplex_row(VecView row, State y, const Counts& at) {
  double sum = 0.0;
  bool ok = true;
  for (double p : row) {
    if (!std::isfinite(p) || p < -1e-12) ok = false;
    sum += p;
  }
  if (!ok || std::abs(sum - 1.0) > 1e-9) {
    throw DomainError("beta(" + std::to_string(y) + ", " + counts_str(at) +
                      ") is not a probability vector");
  }
}

TransitionKernel::TransitionKernel(int N, int d, KernelCaps caps) : N_(N), d_(d) {
  if (N < 0 || d < 1) throw DomainError("kernel needs N >= 0 and d >= 1");
  const std::uint64_t total = binomial(N + d, d);
  if (total > caps.table_entries) {
    throw SizeError("kernel tables need C(" + std::to_string(N + d) + "," + std::to_string(d) +
                    ") = " + std::to_string(total) + " entries, cap is " +
                    std::to_string(caps.table_entries));
  }
  lattices_.reserve(static_cast<std::size_t>(N) + 1);
  coef_.reserve(static_cast<std::size_t>(N) + 1);
  for (int n = 0; n <= N; ++n) {
    lattices_.push_back(std::make_unique<SimplexLattice>(n, d, caps.table_entries));
    const auto& lat = *lattices_.back();
    std::vector<double> c(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
      // n! / Π k_j! as a product of binomials, exact in double for moderate n.
      double v = 1.0;
      int rem = n;
      for (int j = 0; j < d; ++j) {
        const int k = lat.counts(i)[static_cast<std::size_t>(j)];
        v *= static_cast<double>(binomial(rem, k));
        rem -= k;
      }
      c[i] = v;
    }
    coef_.push_back(std::move(c));
  }
}

template <class Rows>
RankLaw TransitionKernel::convolve(State x, const Counts& z, Rows&& rows,
                                   std::span<const State> order_in) const {
  if (z.size() != static_cast<std::size_t>(d_)) throw DomainError("counts have wrong dimension");
  if (std::accumulate(z.begin(), z.end(), 0) != N_ || *std::min_element(z.begin(), z.end()) < 0) {
    throw DomainError("counts " + counts_str(z) + " do not sum to N = " + std::to_string(N_));
  }
  const std::vector<State> order = default_order(d_, order_in);

  // Dense buffer over the lattice of the running total.
  int total = 0;
  std::vector<double> cur{1.0};
  std::vector<double> next;
  std::vector<double> factor;
  Counts acc(static_cast<std::size_t>(d_));
  for (State y : order) {
    const int ny = z[static_cast<std::size_t>(y)];
    if (ny == 0) continue;
    const Counts at = shifted_counts(z, x, y);
    const VecView p = rows(y, at);
    check_simplex_row(p, y, at);

    const SimplexLattice& fl = *lattices_[static_cast<std::size_t>(ny)];
    const auto& coef = coef_[static_cast<std::size_t>(ny)];
    factor.assign(fl.size(), 0.0);
    for (std::size_t i = 0; i < fl.size(); ++i) {
      double v = coef[i];
      const Counts& k = fl.counts(i);
      for (int j = 0; j < d_ && v != 0.0; ++j) {
        const int kj = k[static_cast<std::size_t>(j)];
        if (kj > 0) v *= std::pow(std::max(p[static_cast<std::size_t>(j)], 0.0), kj);
      }
      factor[i] = v;
    }

    const SimplexLattice& from = *lattices_[static_cast<std::size_t>(total)];
    const SimplexLattice& to = *lattices_[static_cast<std::size_t>(total + ny)];
    next.assign(to.size(), 0.0);
    for (std::size_t a = 0; a < from.size(); ++a) {
      const double pa = cur[a];
      if (pa == 0.0) continue;
      const Counts& ca = from.counts(a);
      for (std::size_t b = 0; b < fl.size(); ++b) {
        const double pb = factor[b];
        if (pb == 0.0) continue;
        const Counts& cb = fl.counts(b);
        for (int j = 0; j < d_; ++j) {
          acc[static_cast<std::size_t>(j)] = ca[static_cast<std::size_t>(j)] + cb[static_cast<std::size_t>(j)];
        }
        next[to.rank(acc)] += pa * pb;
      }
    }
    cur.swap(next);
    total += ny;
  }

  RankLaw out;
  for (std::size_t r = 0; r < cur.size(); ++r) {
    if (cur[r] > 0.0) {
      out.ranks.push_back(r);
      out.probs.push_back(cur[r]);
    }
  }
  return out;
}

RankLaw TransitionKernel::law(State x, std::size_t node, const NodePolicy& beta,
                              std::span<const State> order) const {
  const SimplexLattice& lat = lattice();
  return convolve(
      x, lat.counts(node),
      [&](State y, const Counts& at) { return beta.row(y, lat.rank(at)); }, order);
}

RankLaw TransitionKernel::law(State x, const Counts& z, const RowLookup& beta,
                              std::span<const State> order) const {
  Vec row;
  return convolve(
      x, z,
      [&](State y, const Counts& at) -> VecView {
        row = beta(y, at);
        if (row.size() != static_cast<std::size_t>(d_)) {
          throw DomainError("beta row has wrong dimension");
        }
        return row;
      },
      order);
}

TransitionLaw TransitionKernel::expand(State x, const Counts& z, const RankLaw& law) const {
  TransitionLaw out;
  out.x = x;
  out.source = z;
  out.probs = law.probs;
  out.support.reserve(law.ranks.size());
  for (std::size_t r : law.ranks) out.support.push_back(lattice().counts(r));
  return out;
}

Vec TransitionKernel::expect(const RankLaw& law, const NodeValues& phi) const {
  Vec e(static_cast<std::size_t>(d_), 0.0);
  for (int y = 0; y < d_; ++y) {
    double s = 0.0;
    for (std::size_t i = 0; i < law.ranks.size(); ++i) s += law.probs[i] * phi(y, law.ranks[i]);
    e[static_cast<std::size_t>(y)] = s;
  }
  return e;
}

Vec TransitionKernel::expect(State x, std::size_t node, const NodeValues& phi,
                             const NodePolicy& beta) const {
  return expect(law(x, node, beta), phi);
}

TransitionLaw exact_law(State x, const Counts& z, const RowLookup& beta) {
  const int N = std::accumulate(z.begin(), z.end(), 0);
  const TransitionKernel kernel(N, static_cast<int>(z.size()));
  return kernel.expand(x, z, kernel.law(x, z, beta));
}

Vec expect_value(State x, const Counts& z, const GridFunction& phi, const RowLookup& beta) {
  const TransitionLaw law = exact_law(x, z, beta);
  Vec e(z.size(), 0.0);
  for (std::size_t y = 0; y < z.size(); ++y) {
    double s = 0.0;
    for (std::size_t i = 0; i < law.support.size(); ++i) {
      s += law.probs[i] * phi(static_cast<State>(y), law.support[i]);
    }
    e[y] = s;
  }
  return e;
}

std::vector<Counts> sample_law(State x, const Counts& z, const RowLookup& beta,
                               std::mt19937_64& rng, std::size_t n) {
  const std::size_t d = z.size();
  std::vector<Vec> rows(d);
  for (std::size_t y = 0; y < d; ++y) {
    if (z[y] == 0) continue;
    const Counts at = shifted_counts(z, x, static_cast<State>(y));
    rows[y] = beta(static_cast<State>(y), at);
    check_simplex_row(rows[y], static_cast<State>(y), at);
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  // Last state with positive mass absorbs rounding in the cumulative sum.
  std::vector<std::size_t> last(d, 0);
  for (std::size_t y = 0; y < d; ++y) {
    for (std::size_t k = 0; k < rows[y].size(); ++k) {
      if (rows[y][k] > 0.0) last[y] = k;
    }
  }
  std::vector<Counts> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    Counts c(d, 0);
    for (std::size_t y = 0; y < d; ++y) {
      for (int i = 0; i < z[y]; ++i) {
        const double xi = u(rng);
        double cum = 0.0;
        std::size_t j = 0;
        for (j = 0; j < d; ++j) {
          cum += rows[y][j];
          if (xi < cum && rows[y][j] > 0.0) break;
        }
        if (j >= d) j = last[y];
        ++c[j];
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

CoupledSampleResult coupled_sample(State x, const Counts& z, const RowLookup& alpha,
                                   const Counts& z_tilde, const RowLookup& alpha_tilde,
                                   std::mt19937_64& rng, std::size_t n) {
  const std::size_t d = z.size();
  if (z_tilde.size() != d) throw DomainError("coupled_sample: dimension mismatch");
  const int N = std::accumulate(z.begin(), z.end(), 0);
  if (N != std::accumulate(z_tilde.begin(), z_tilde.end(), 0) || N == 0) {
    throw DomainError("coupled_sample: populations must have the same positive size");
  }
  std::vector<Vec> p(d), q(d);
  for (std::size_t y = 0; y < d; ++y) {
    if (z[y] > 0) {
      const Counts at = shifted_counts(z, x, static_cast<State>(y));
      p[y] = alpha(static_cast<State>(y), at);
      check_simplex_row(p[y], static_cast<State>(y), at);
    }
    if (z_tilde[y] > 0) {
      const Counts at = shifted_counts(z_tilde, x, static_cast<State>(y));
      q[y] = alpha_tilde(static_cast<State>(y), at);
      check_simplex_row(q[y], static_cast<State>(y), at);
    }
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CoupledSampleResult res;
  res.distances.reserve(n);
  std::vector<int> a(d), b(d);
  for (std::size_t s = 0; s < n; ++s) {
    std::fill(a.begin(), a.end(), 0);
    std::fill(b.begin(), b.end(), 0);
    for (std::size_t y = 0; y < d; ++y) {
      const int total = std::max(z[y], z_tilde[y]);
      for (int i = 0; i < total; ++i) {
        const double xi = u(rng);
        for (std::size_t j = 0; j < d; ++j) {
          if (i < z[y] && xi <= p[y][j]) ++a[j];
          if (i < z_tilde[y] && xi <= q[y][j]) ++b[j];
        }
      }
    }
    double dist = 0.0;
    for (std::size_t j = 0; j < d; ++j) dist += std::abs(a[j] - b[j]);
    res.distances.push_back(dist / N);
  }
  if (n > 0) {
    double mean = 0.0;
    for (double v : res.distances) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : res.distances) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    res.mean = mean;
    res.stderr_mean = std::sqrt(var / static_cast<double>(n));
  }
  return res;
}

void write_law_csv(std::ostream& out, const TransitionLaw& law) {
  const std::size_t d = law.source.size();
  for (std::size_t j = 0; j < d; ++j) out << "c_" << j << ",";
  out << "prob\n";
  out << std::setprecision(17);
  for (std::size_t i = 0; i < law.support.size(); ++i) {
    for (int c : law.support[i]) out << c << ",";
    out << law.probs[i] << "\n";
  }
}

LawCache::LawCache(std::optional<std::filesystem::path> dir) : dir_(std::move(dir)) {
  if (dir_) std::filesystem::create_directories(*dir_);
}

LawCache LawCache::from_env() {
  const char* env = std::getenv("NLLLAB_CACHE_DIR");
  if (env == nullptr || *env == '\0') return LawCache();
  return LawCache(std::filesystem::path(env));
}

namespace {

std::uint64_t law_key(const TransitionKernel& kernel, State x, std::size_t node,
                      const NodePolicy& beta) {
  const SimplexLattice& lat = kernel.lattice();
  const Counts& z = lat.counts(node);
  std::string buf;
  auto put = [&](const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); };
  const int N = kernel.population();
  const int d = kernel.dim();
  put(&N, sizeof N);
  put(&d, sizeof d);
  put(&x, sizeof x);
  put(&node, sizeof node);
  for (int y = 0; y < d; ++y) {
    if (z[static_cast<std::size_t>(y)] == 0) continue;
    const auto row = beta.row(y, lat.rank(shifted_counts(z, x, y)));
    put(row.data(), row.size() * sizeof(double));
  }
  return fnv1a64(buf);
}

}  // namespace

RankLaw LawCache::get(const TransitionKernel& kernel, State x, std::size_t node,
                      const NodePolicy& beta) {
  const std::uint64_t key = law_key(kernel, x, node, beta);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++hits_;
      return it->second;
    }
  }
  std::optional<std::filesystem::path> file;
  if (dir_) {
    std::ostringstream name;
    name << std::hex << std::setw(16) << std::setfill('0') << key << ".law";
    file = *dir_ / name.str();
    std::ifstream in(*file, std::ios::binary);
    std::uint64_t stored = 0, n = 0;
    if (in && in.read(reinterpret_cast<char*>(&stored), sizeof stored) &&
        in.read(reinterpret_cast<char*>(&n), sizeof n) && stored == key &&
        n <= kernel.lattice().size()) {
      RankLaw law;
      law.ranks.resize(n);
      law.probs.resize(n);
      std::vector<std::uint64_t> r(n);
      if (in.read(reinterpret_cast<char*>(r.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t))) &&
          in.read(reinterpret_cast<char*>(law.probs.data()), static_cast<std::streamsize>(n * sizeof(double)))) {
        for (std::size_t i = 0; i < n; ++i) law.ranks[i] = static_cast<std::size_t>(r[i]);
        std::lock_guard<std::mutex> lock(mu_);
        ++hits_;
        memo_.emplace(key, law);
        return law;
      }
    }
  }
  RankLaw law = kernel.law(x, node, beta);
  if (file) {
    // Unique temporary name, then rename, so concurrent writers never expose a
    // partial file.
    std::ostringstream tmp;
    tmp << file->string() << ".tmp" << std::hash<std::thread::id>{}(std::this_thread::get_id());
    {
      std::ofstream out(tmp.str(), std::ios::binary | std::ios::trunc);
      const std::uint64_t n = law.ranks.size();
      std::vector<std::uint64_t> r(law.ranks.begin(), law.ranks.end());
      out.write(reinterpret_cast<const char*>(&key), sizeof key);
      out.write(reinterpret_cast<const char*>(&n), sizeof n);
      out.write(reinterpret_cast<const char*>(r.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
      out.write(reinterpret_cast<const char*>(law.probs.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    std::error_code ec;
    std::filesystem::rename(tmp.str(), *file, ec);
    if (ec) std::filesystem::remove(tmp.str(), ec);
  }
  std::lock_guard<std::mutex> lock(mu_);
  ++misses_;
  memo_.emplace(key, law);
  return law;
}

std::size_t LawCache::hits() const {
  std::lock_guard<std::mutex> lock(mu_);
  return hits_;
}

std::size_t LawCache::misses() const {
  std::lock_guard<std::mutex> lock(mu_);
  return misses_;
}

}  // namespace nlllab

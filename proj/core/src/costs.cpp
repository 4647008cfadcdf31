#include "nlllab/costs.hpp"

#include <cmath>

#include "nlllab/error.hpp"

namespace nlllab {

namespace {

void check_couplings(const QuadraticCouplings& k) {
  if (!(k.c > 0.0) || !std::isfinite(k.c)) throw ConfigError("cost weight c must be > 0");
  if (!(k.kappa_g >= 0.0) || !(k.kappa_ell >= 0.0)) {
    throw ConfigError("cost couplings kappa_g, kappa_ell must be >= 0");
  }
}

double quadratic_part(const QuadraticCouplings& k, State x, VecView rate) {
  double s = 0.0;
  for (std::size_t y = 0; y < rate.size(); ++y) {
    if (static_cast<State>(y) != x) s += rate[y] * rate[y];
  }
  return 0.5 * k.c * s;
}

}  // namespace

QuadraticRateCost::QuadraticRateCost(QuadraticCouplings k) : k_(k) { check_couplings(k_); }

std::map<std::string, double> QuadraticRateCost::params() const {
  return {{"c", k_.c}, {"kappa_g", k_.kappa_g}, {"kappa_ell", k_.kappa_ell}};
}

double QuadraticRateCost::running(State x, VecView mu, VecView rate) const {
  return quadratic_part(k_, x, rate) + k_.kappa_ell * mu[static_cast<std::size_t>(x)];
}

Vec QuadraticRateCost::running_subgrad(State x, VecView /*mu*/, VecView rate) const {
  Vec g(rate.size(), 0.0);
  for (std::size_t y = 0; y < rate.size(); ++y) {
    if (static_cast<State>(y) != x) g[y] = k_.c * rate[y];
  }
  return g;
}

double QuadraticRateCost::terminal(State x, VecView mu) const {
  return k_.kappa_g * (1.0 - mu[static_cast<std::size_t>(x)]);
}

double QuadraticRateCost::separable_rate_argmin(State x, VecView, State y, double dv,
                                                double floor) const {
  if (y == x) throw DomainError("rate minimizer is defined for y != x only");
  return std::max(floor, -dv / k_.c);
}

QuarticRateCost::QuarticRateCost(QuadraticCouplings k, double lambda) : k_(k), lambda_(lambda) {
  check_couplings(k_);
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be >= 0");
}

std::map<std::string, double> QuarticRateCost::params() const {
  return {{"c", k_.c}, {"kappa_g", k_.kappa_g}, {"kappa_ell", k_.kappa_ell}, {"lambda", lambda_}};
}

double QuarticRateCost::running(State x, VecView mu, VecView rate) const {
  double q = 0.0;
  for (std::size_t y = 0; y < rate.size(); ++y) {
    if (static_cast<State>(y) != x) q += std::pow(rate[y], 4);
  }
  return quadratic_part(k_, x, rate) + 0.25 * lambda_ * q + k_.kappa_ell * mu[static_cast<std::size_t>(x)];
}

Vec QuarticRateCost::running_subgrad(State x, VecView /*mu*/, VecView rate) const {
  Vec g(rate.size(), 0.0);
  for (std::size_t y = 0; y < rate.size(); ++y) {
    if (static_cast<State>(y) != x) g[y] = k_.c * rate[y] + lambda_ * rate[y] * rate[y] * rate[y];
  }
  return g;
}

double QuarticRateCost::terminal(State x, VecView mu) const {
  return k_.kappa_g * (1.0 - mu[static_cast<std::size_t>(x)]);
}

double QuarticRateCost::curvature_bound(double h) const {
  return (k_.c + 3.0 * lambda_ / (h * h)) / h;
}

double QuarticRateCost::separable_rate_argmin(State x, VecView, State y, double dv,
                                              double floor) const {
  if (y == x) throw DomainError("rate minimizer is defined for y != x only");
  if (lambda_ == 0.0) return std::max(floor, -dv / k_.c);
  // Unique real root of lambda r^3 + c r + dv = 0 (Cardano, p > 0), then one
  // Newton polish.
  const double p = k_.c / lambda_;
  const double q = dv / lambda_;
  const double disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  double r = std::cbrt(-q / 2.0 + disc) + std::cbrt(-q / 2.0 - disc);
  r -= (lambda_ * r * r * r + k_.c * r + dv) / (3.0 * lambda_ * r * r + k_.c);
  return std::max(floor, r);
}

std::shared_ptr<const CostModel> make_cost(const std::string& kind,
                                           const std::map<std::string, double>& params) {
  auto get = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  QuadraticCouplings k{get("c", 1.0), get("kappa_g", 1.0), get("kappa_ell", 0.0)};
  if (kind == "quadratic") return std::make_shared<QuadraticRateCost>(k);
  if (kind == "quartic") return std::make_shared<QuarticRateCost>(k, get("lambda", 0.0));
  throw ConfigError("unknown cost kind '" + kind + "'");
}

}  // namespace nlllab

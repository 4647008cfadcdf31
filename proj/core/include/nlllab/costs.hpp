#pragma once

#include <map>
#include <string>

#include "nlllab/game_model.hpp"

namespace nlllab {

/// ℓ(x, μ, r) = c/2 Σ_{y != x} r_y^2 + kappa_ell μ_x,  g(x, μ) = kappa_g (1 - μ_x).
class QuadraticRateCost : public CostModel {
 public:
  explicit QuadraticRateCost(QuadraticCouplings k = {});

  std::string kind() const override { return "quadratic"; }
  std::map<std::string, double> params() const override;

  double running(State x, VecView mu, VecView rate) const override;
  Vec running_subgrad(State x, VecView mu, VecView rate) const override;
  double terminal(State x, VecView mu) const override;
  std::optional<double> quadratic_weight() const override { return k_.c; }
  double curvature_bound(double h) const override { return k_.c / h; }
  double separable_rate_argmin(State x, VecView mu, State y, double dv,
                               double floor) const override;

  const QuadraticCouplings& couplings() const { return k_; }

 private:
  QuadraticCouplings k_;
};

/// Quadratic model plus lambda/4 Σ_{y != x} r_y^4.
class QuarticRateCost : public CostModel {
 public:
  QuarticRateCost(QuadraticCouplings k, double lambda);

  std::string kind() const override { return "quartic"; }
  std::map<std::string, double> params() const override;

  double running(State x, VecView mu, VecView rate) const override;
  Vec running_subgrad(State x, VecView mu, VecView rate) const override;
  double terminal(State x, VecView mu) const override;
  double curvature_bound(double h) const override;
  double separable_rate_argmin(State x, VecView mu, State y, double dv,
                               double floor) const override;

 private:
  QuadraticCouplings k_;
  double lambda_;
};

/// Rebuilds a cost model from its kind and params; ConfigError on unknown kinds.
std::shared_ptr<const CostModel> make_cost(const std::string& kind,
                                           const std::map<std::string, double>& params);

}  // namespace nlllab

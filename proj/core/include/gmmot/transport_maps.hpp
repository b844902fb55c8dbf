#pragma once

#include <cstdint>

#include "gmmot/mw2.hpp"

namespace gmmot {

/// Pointwise evaluation of the maps carried by an MW2 plan. Caches the
/// source density factors, so build one per plan and reuse it.
class PlanEvaluator {
 public:
  /// Throws kDensityUndefined if a source covariance is singular and
  /// kDegenerateSource if a positive-weight pair has no map.
  explicit PlanEvaluator(const TransportPlan& plan);

  /// K0 x K1 matrix p_kl(x) = w_kl g_k(x) / sum_j pi_j g_j(x).
  Matrix posterior(const Vector& x) const;
  /// Conditional expectation sum_kl p_kl(x) T_kl(x).
  Vector t_mean(const Vector& x) const;
  /// T_kl(x) for a pair drawn from the posterior with a uniform derived from
  /// the seed alone.
  Vector t_rand(const Vector& x, std::uint64_t seed) const;

  /// One point per row. t_rand_rows derives the uniform for row i from (seed, i).
  Matrix t_mean_rows(const Matrix& points) const;
  Matrix t_rand_rows(const Matrix& points, std::uint64_t seed) const;

 private:
  // Posterior probability of each support pair.
  Vector pair_posterior(const Vector& component_logs) const;
  Matrix pair_posteriors(const Matrix& points) const;
  int draw(const Vector& post, double u) const;

  const TransportPlan& plan_;
  GmmDensity density_;
  std::vector<std::pair<int, int>> pairs_;
  Vector log_pair_weights_;
  std::vector<AffineMap> maps_;
};

Matrix posterior(const TransportPlan& plan, const Vector& x);
Vector t_mean(const TransportPlan& plan, const Vector& x);
Vector t_rand(const TransportPlan& plan, const Vector& x, std::uint64_t seed);

}  // namespace gmmot

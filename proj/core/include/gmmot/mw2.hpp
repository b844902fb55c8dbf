#pragma once

#include <optional>
#include <vector>

#include "gmmot/gmm.hpp"
#include "gmmot/transport_lp.hpp"

namespace gmmot {

/// Optimal MW2 plan between two canonical mixtures: a discrete coupling of
/// the components plus the Gaussian optimal map for every component pair.
class TransportPlan {
 public:
  TransportPlan(Gmm source, Gmm target, DiscreteCoupling coupling);

  const Gmm& source() const { return source_; }
  const Gmm& target() const { return target_; }
  const DiscreteCoupling& coupling() const { return coupling_; }
  double weight(int k, int l) const { return coupling_.weights(k, l); }

  /// Map from source component k to target component l; empty when the
  /// source covariance is singular.
  const std::optional<AffineMap>& map(int k, int l) const {
    return maps_[static_cast<std::size_t>(k * target_.size() + l)];
  }
  /// True when every pair with positive weight has a map.
  bool maps_available() const;

  /// (k, l) pairs with weight above the zero threshold, row-major order.
  std::vector<std::pair<int, int>> support() const;

 private:
  Gmm source_;
  Gmm target_;
  DiscreteCoupling coupling_;
  std::vector<std::optional<AffineMap>> maps_;
};

struct Mw2Result {
  double distance = 0.0;
  double squared = 0.0;
  TransportPlan plan;
};

/// Pairwise squared W2 costs between components.
Matrix mw2_cost_matrix(const Gmm& gmm0, const Gmm& gmm1);

/// MW2 distance and optimal plan. Both inputs are canonicalized first.
Mw2Result mw2(const Gmm& gmm0, const Gmm& gmm1);

/// Displacement interpolation along the plan, one component per positive-
/// weight pair. Throws kDegenerateSource when a needed map is missing.
Gmm mw2_geodesic(const TransportPlan& plan, double t);

/// sqrt(2 sum_k pi0_k tr S0_k) + sqrt(2 sum_k pi1_k tr S1_k).
double mw2_trace_bound(const Gmm& gmm0, const Gmm& gmm1);

/// Exact W2 between one-dimensional mixtures from the quantile coupling.
/// The quadrature runs over the probit variable s = Phi^{-1}(u) on [-10, 10]
/// with `quad_points` midpoint nodes; quantiles come from bisection on the
/// mixture CDF (or survival function in the upper half).
double w2_1d_exact(const Gmm& gmm0, const Gmm& gmm1, int quad_points = 4096);

/// Exact W2 between a 1D sample (uniform weights) and a 1D mixture with
/// non-degenerate components. The i-th order statistic is coupled with the
/// quantile slice [i/n, (i+1)/n]; each slice integral uses Gaussian partial
/// moments, so no quadrature is involved.
double w2_1d_empirical(std::vector<double> samples, const Gmm& gmm);

/// Quantile of a 1D mixture at probability p, accurate in both tails when
/// `upper` is true and p is the upper-tail probability.
double mixture_quantile_1d(const Gmm& gmm, double p, bool upper = false);

}  // namespace gmmot

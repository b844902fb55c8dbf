#pragma once

#include <span>
#include <vector>

#include "gmmot/gmm.hpp"
#include "gmmot/transport_lp.hpp"

namespace gmmot {

struct MultiMarginalResult {
  /// Optimal value of the discrete multi-marginal problem (an MMW2^2).
  double cost = 0.0;
  MultiCoupling coupling;
  /// Canonicalized inputs; coupling modes index their components.
  std::vector<Gmm> marginals;
};

struct BarycenterResult {
  /// One component per support entry of the coupling, in ascending flat-index
  /// order. Not canonicalized, so duplicates may appear when weights vanish.
  Gmm barycenter;
  MultiCoupling coupling;
  double cost = 0.0;
  /// Component tuple behind each barycenter component.
  std::vector<std::vector<int>> tuples;
};

/// Multi-marginal problem between J >= 2 mixtures with pairwise-average
/// Gaussian costs. `weights` must lie on the simplex within 1e-9.
MultiMarginalResult mmw2(std::span<const Gmm> gmms, const Vector& weights);

/// Mixture barycenter: Gaussian barycenters of the component tuples charged by
/// the optimal multi-marginal coupling.
BarycenterResult mw2_barycenter(std::span<const Gmm> gmms, const Vector& weights);

}  // namespace gmmot

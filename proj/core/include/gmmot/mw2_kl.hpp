#pragma once

#include <cstdint>
#include <vector>

#include "gmmot/gmm.hpp"

namespace gmmot {

/// One-dimensional coupling gamma = sum_k pi_k N((m0_k, m1_k), C_k) with
/// C_k built from standard deviations s0_k, s1_k and full correlation.
struct CouplingParams1D {
  Vector pi;
  Vector m0;
  Vector m1;
  Vector s0;
  Vector s1;

  int size() const { return static_cast<int>(pi.size()); }
  /// Marginal `i` (0 or 1) as a 1D mixture.
  Gmm marginal(int i) const;
};

/// sum_k pi_k [(m0_k - m1_k)^2 + (s0_k - s1_k)^2].
double mw2kl_transport_term(const CouplingParams1D& params);

/// F = transport term - lambda (mean log p0 over nu0 + mean log p1 over nu1).
/// pi is used as given, so the energy is defined off the simplex as well.
double mw2kl_energy(const CouplingParams1D& params, const PointCloud& nu0, const PointCloud& nu1,
                    double lambda);

/// Gradient of mw2kl_energy with respect to every parameter.
CouplingParams1D mw2kl_gradient(const CouplingParams1D& params, const PointCloud& nu0,
                                const PointCloud& nu1, double lambda);

struct Mw2KlOptions {
  std::uint64_t seed = 0;
  double step = 1e-3;
  int iterations = 5000;
};

struct Mw2KlResult {
  CouplingParams1D params;
  /// Energy at the initialization followed by every accepted iterate.
  std::vector<double> energy;
  double sigma_min = 0.0;
};

/// Projected gradient descent from independent K-component EM fits of the
/// two clouds matched by sorted means. Each step halves until the energy
/// decreases; standard deviations are floored at sigma_min and pi projected
/// onto the simplex.
Mw2KlResult mw2kl_optimize(const PointCloud& nu0, const PointCloud& nu1, int k, double lambda,
                           const Mw2KlOptions& options = {});

}  // namespace gmmot

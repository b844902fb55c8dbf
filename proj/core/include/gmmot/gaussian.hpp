#pragma once

#include <span>
#include <vector>

#include "gmmot/spd.hpp"

namespace gmmot {

/// N(mean, cov). Degenerate covariances (including zero, i.e. a Dirac mass)
/// are allowed; operations that need an inverse say so.
class Gaussian {
 public:
  Gaussian(Vector mean, SpdMatrix cov);

  static Gaussian standard(int dim);
  static Gaussian dirac(Vector point);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vector& mean() const { return mean_; }
  const SpdMatrix& cov() const { return cov_; }

  friend bool operator==(const Gaussian& a, const Gaussian& b) {
    return a.mean_.size() == b.mean_.size() && a.mean_ == b.mean_ && a.cov_ == b.cov_;
  }

 private:
  Vector mean_;
  SpdMatrix cov_;
};

/// x -> linear * x + offset.
struct AffineMap {
  Matrix linear;
  Vector offset;

  static AffineMap identity(int dim);

  int dim() const { return static_cast<int>(offset.size()); }
  Vector operator()(const Vector& x) const { return linear * x + offset; }

  /// Image measure of `g` under this map.
  Gaussian push(const Gaussian& g) const;
};

/// Squared W2 distance between two Gaussians (closed form), clamped at zero.
double w2_gaussian_sq(const Gaussian& g0, const Gaussian& g1);

/// Optimal affine map pushing g0 onto g1. Throws kDegenerateSource when the
/// covariance of g0 is singular.
AffineMap ot_map_gaussian(const Gaussian& g0, const Gaussian& g1);

/// Point at time t in [0, 1] on the W2 geodesic from g0 to g1. Singular
/// covariances go through pseudo-inverses.
Gaussian interpolate_gaussian(const Gaussian& g0, const Gaussian& g1, double t);

struct BarycenterOptions {
  double tolerance = 1e-10;  // relative Frobenius residual of the fixed point
  int max_iterations = 500;
};

/// W2 barycenter of Gaussians by fixed-point iteration on the covariance,
/// initialized at the arithmetic mean of the covariances.
Gaussian gaussian_barycenter(std::span<const Gaussian> gaussians, const Vector& weights,
                             const BarycenterOptions& options = {});

/// Relative Frobenius residual of the barycenter fixed-point equation at `cov`.
double barycenter_residual(std::span<const Gaussian> gaussians, const Vector& weights,
                           const SpdMatrix& cov);

/// Multi-marginal cost: sum_j weights_j * W2^2(g_j, barycenter).
double mmw2_gaussian_sq(std::span<const Gaussian> gaussians, const Vector& weights,
                        const BarycenterOptions& options = {});

/// Optimal multi-marginal plan between Gaussians, expressed as J affine maps
/// sending a sample of gaussians[0] to its coupled point in marginal j.
/// maps[0] is the identity. All covariances must be positive definite.
std::vector<AffineMap> multimarginal_plan_gaussian(std::span<const Gaussian> gaussians,
                                                   const Vector& weights,
                                                   const BarycenterOptions& options = {});

}  // namespace gmmot

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gmmot/gmm.hpp"

namespace gmmot {

struct KMeansResult {
  std::vector<int> labels;
  Matrix centers;  // k x d
  /// Sum of squared distances to the assigned center, after each assignment.
  std::vector<double> objective;
};

/// k-means++ seeding followed by Lloyd iterations. Empty clusters are
/// re-seeded at the point farthest from its current center.
KMeansResult kmeans(const PointCloud& points, int k, std::uint64_t seed, int iterations = 50);

struct EmOptions {
  int iterations = 100;
  /// Added to every covariance at each M-step. Defaults to 1e-6 times the
  /// average per-coordinate variance of the data.
  std::optional<double> cov_reg;
  /// Stop when the average log-likelihood improves by less than this,
  /// relative to its magnitude.
  double tolerance = 1e-8;
};

struct EmResult {
  Gmm gmm;
  /// Average log-likelihood of the parameters at the start of each iteration.
  std::vector<double> log_likelihood;
  double cov_reg = 0.0;
  bool converged = false;
};

/// EM fit from a k-means initialization; the returned mixture is canonical.
EmResult fit_em_traced(const PointCloud& points, int k, std::uint64_t seed,
                       const EmOptions& options = {});

inline Gmm fit_em(const PointCloud& points, int k, std::uint64_t seed,
                  const EmOptions& options = {}) {
  return fit_em_traced(points, k, seed, options).gmm;
}

/// Average log-likelihood of the cloud under the mixture.
double average_log_likelihood(const Gmm& gmm, const PointCloud& points);

}  // namespace gmmot

#pragma once

#include <cstdint>
#include <vector>

#include "gmmot/gaussian.hpp"

namespace gmmot {

/// Weights of a Gmm must sum to one within this tolerance.
inline constexpr double kGmmWeightTol = 1e-9;
/// Components closer than this (max abs difference of mean and covariance
/// entries) are merged by canonicalize().
inline constexpr double kMergeTol = 1e-12;

/// Finite Gaussian mixture sum_k weights(k) * components[k].
class Gmm {
 public:
  Gmm(Vector weights, std::vector<Gaussian> components);
  explicit Gmm(Gaussian single);

  int size() const { return static_cast<int>(components_.size()); }
  int dim() const { return components_.front().dim(); }
  const Vector& weights() const { return weights_; }
  double weight(int k) const { return weights_(k); }
  const std::vector<Gaussian>& components() const { return components_; }
  const Gaussian& component(int k) const { return components_[static_cast<std::size_t>(k)]; }

  /// Mixture mean sum_k pi_k m_k.
  Vector mean() const;

  friend bool operator==(const Gmm& a, const Gmm& b) {
    return a.weights_.size() == b.weights_.size() && a.weights_ == b.weights_ &&
           a.components_ == b.components_;
  }

 private:
  Vector weights_;
  std::vector<Gaussian> components_;
};

/// n points in R^d, one per row.
class PointCloud {
 public:
  explicit PointCloud(Matrix points);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  const Matrix& points() const { return points_; }
  auto point(int i) const { return points_.row(i).transpose(); }

 private:
  Matrix points_;
};

/// Cached Cholesky factors for repeated density evaluation. Throws
/// kDensityUndefined if any component covariance is singular.
class GmmDensity {
 public:
  explicit GmmDensity(const Gmm& gmm);

  int size() const { return static_cast<int>(log_norm_.size()); }
  int dim() const { return dim_; }

  /// log(pi_k) + log g_k(x) for every component (-inf for zero weight).
  Vector weighted_log_densities(const Vector& x) const;
  /// log g_k(x) for every component.
  Vector component_log_densities(const Vector& x) const;
  double log_pdf(const Vector& x) const;

  /// n x K matrix of log g_k(x_i) for all rows of `points`.
  Matrix component_log_densities(const Matrix& points) const;

 private:
  int dim_;
  Vector log_weights_;
  std::vector<Vector> means_;
  std::vector<Eigen::LLT<Matrix>> factors_;
  Vector log_norm_;
};

/// Natural-log mixture density at x, via log-sum-exp.
double log_pdf(const Gmm& gmm, const Vector& x);

/// Draws n points; deterministic given the seed. Degenerate covariances are
/// fine (the symmetric square root is used as the factor).
PointCloud sample(const Gmm& gmm, int n, std::uint64_t seed);

/// Drops zero-weight components, merges duplicates (within kMergeTol) and
/// sorts components lexicographically by mean then covariance.
Gmm canonicalize(const Gmm& gmm);

/// log(sum exp(v)) with -inf entries allowed.
double log_sum_exp(const Vector& v);

}  // namespace gmmot

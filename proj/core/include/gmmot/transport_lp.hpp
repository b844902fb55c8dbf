#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gmmot/spd.hpp"

namespace gmmot {

/// Tolerance on marginal sums accepted by the LP solvers (renormalized after).
inline constexpr double kMarginalTol = 1e-9;
/// Largest flattened cost tensor accepted by the dense multi-marginal solver.
inline constexpr std::size_t kMaxMultiMarginalSize = 1'000'000;

/// K0 x K1 coupling with prescribed row and column sums.
struct DiscreteCoupling {
  Matrix weights;

  /// Number of entries strictly greater than `threshold`.
  int support_size(double threshold = 0.0) const;
};

struct TransportSolution {
  DiscreteCoupling coupling;
  double value = 0.0;
};

/// Exact solution of the two-marginal transportation problem by the
/// transportation simplex (north-west corner start, Bland's pivoting rule).
/// The returned coupling is an optimal basic solution, so it has at most
/// K0 + K1 - 1 positive entries.
TransportSolution solve_transport(const Matrix& cost, const Vector& pi0, const Vector& pi1);

/// Dense row-major tensor; the last index varies fastest.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, double fill = 0.0);

  const std::vector<int>& shape() const { return shape_; }
  int order() const { return static_cast<int>(shape_.size()); }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double at(std::span<const int> index) const { return values_[flat_index(index)]; }
  double& at(std::span<const int> index) { return values_[flat_index(index)]; }

  std::size_t flat_index(std::span<const int> index) const;
  std::vector<int> unravel(std::size_t flat) const;

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
  std::vector<double> values_;
};

/// Coupling between J discrete marginals.
struct MultiCoupling {
  Tensor weights;

  /// Flat indices of entries strictly greater than `threshold`, ascending.
  std::vector<std::size_t> support(double threshold = 0.0) const;
  /// Sum over every mode except `mode`.
  Vector marginal(int mode) const;
};

struct MultiTransportSolution {
  MultiCoupling coupling;
  double value = 0.0;
};

/// Exact solution of the multi-marginal transportation LP by a dense revised
/// simplex on the flattened tensor. Returns an optimal vertex with at most
/// sum_j K_j - J + 1 positive entries.
MultiTransportSolution solve_multimarginal(const Tensor& cost, std::span<const Vector> marginals);

}  // namespace gmmot

#pragma once

#include <Eigen/Dense>

namespace gmmot {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Eigenvalues at or below `kRankTol * lambda_max` count as zero.
inline constexpr double kRankTol = 1e-12;
inline constexpr int kDefaultJacobiSweeps = 100;

/// Symmetric positive semi-definite matrix. Immutable once built.
///
/// The checked constructor symmetrizes its input and rejects matrices with an
/// eigenvalue below -1e-10 * (1 + spectral radius).
class SpdMatrix {
 public:
  explicit SpdMatrix(const Matrix& m);

  /// Symmetrizes without the spectral check. For results that are PSD by
  /// construction (products like A * S * A^T, spectral functions).
  static SpdMatrix unchecked(Matrix m);

  static SpdMatrix identity(int dim);
  static SpdMatrix zero(int dim);
  static SpdMatrix diagonal(const Vector& diag);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }

  friend bool operator==(const SpdMatrix& a, const SpdMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  struct Trusted {};
  SpdMatrix(Matrix m, Trusted);

  Matrix m_;
};

struct SymEig {
  Vector values;   // descending
  Matrix vectors;  // column i pairs with values(i)
};

/// Cyclic Jacobi eigensolver for a symmetric matrix. Throws
/// ErrorKind::kNumericalFailure if it has not converged after `max_sweeps`.
SymEig sym_eig(const Matrix& symmetric, int max_sweeps = kDefaultJacobiSweeps);
SymEig sym_eig(const SpdMatrix& m, int max_sweeps = kDefaultJacobiSweeps);

/// PSD square root; negative eigenvalues are clamped to zero first.
SpdMatrix sqrtm(const SpdMatrix& m);

/// Moore-Penrose pseudo-inverse.
SpdMatrix pinv(const SpdMatrix& m, double rank_tol = kRankTol);

/// Pseudo-inverse of the square root: eigenvalues below the rank threshold map
/// to zero, the others to 1 / sqrt(lambda).
SpdMatrix pinv_sqrtm(const SpdMatrix& m, double rank_tol = kRankTol);

/// True when the smallest eigenvalue is at or below rank_tol * lambda_max
/// (always true for the zero matrix).
bool is_singular(const SpdMatrix& m, double rank_tol = kRankTol);

double spectral_radius(const SpdMatrix& m);

}  // namespace gmmot

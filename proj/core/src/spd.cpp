#include "gmmot/spd.hpp"

#include <Eigen/Jacobi>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "gmmot/error.hpp"

namespace gmmot {
namespace {

constexpr double kSymTol = 1e-10;

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// V * diag(f(lambda)) * V^T, symmetrized.
template <typename F>
SpdMatrix spectral_apply(const SymEig& eig, F&& f) {
  Vector mapped = eig.values.unaryExpr(f);
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return SpdMatrix::unchecked(std::move(out));
}

}  // namespace

SpdMatrix::SpdMatrix(const Matrix& m) {
  require(m.rows() == m.cols() && m.rows() > 0, ErrorKind::kDimensionMismatch,
          "SpdMatrix: expected a non-empty square matrix");
  require(m.allFinite(), ErrorKind::kInvalidInput, "SpdMatrix: non-finite entry");
  m_ = symmetrized(m);
  const SymEig eig = sym_eig(m_);
  const double radius = eig.values.cwiseAbs().maxCoeff();
  const double smallest = eig.values(eig.values.size() - 1);
  if (smallest < -kSymTol * (1.0 + radius)) {
    throw Error(ErrorKind::kInvalidInput,
                "SpdMatrix: matrix is not positive semi-definite (eigenvalue " +
                    std::to_string(smallest) + ")");
  }
}

SpdMatrix::SpdMatrix(Matrix m, Trusted) : m_(std::move(m)) {}

SpdMatrix SpdMatrix::unchecked(Matrix m) {
  Matrix sym = symmetrized(m);
  return SpdMatrix(std::move(sym), Trusted{});
}

SpdMatrix SpdMatrix::identity(int dim) {
  return SpdMatrix(Matrix::Identity(dim, dim), Trusted{});
}

SpdMatrix SpdMatrix::zero(int dim) { return SpdMatrix(Matrix::Zero(dim, dim), Trusted{}); }

SpdMatrix SpdMatrix::diagonal(const Vector& diag) {
  require((diag.array() >= 0.0).all(), ErrorKind::kInvalidInput,
          "SpdMatrix::diagonal: negative entry");
  return SpdMatrix(Matrix(diag.asDiagonal()), Trusted{});
}

SymEig sym_eig(const Matrix& symmetric, int max_sweeps) {
  require(symmetric.rows() == symmetric.cols(), ErrorKind::kDimensionMismatch,
          "sym_eig: matrix is not square");
  const Eigen::Index n = symmetric.rows();
  Matrix a = symmetrized(symmetric);
  Matrix v = Matrix::Identity(n, n);

  const double eps = std::numeric_limits<double>::epsilon();
  const double floor = 1e-18 * a.norm();

  bool converged = n <= 1;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    bool rotated = false;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = std::abs(a(p, q));
        const double scale = eps * std::sqrt(std::abs(a(p, p)) * std::abs(a(q, q)));
        if (apq <= std::max(scale, floor)) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        Eigen::JacobiRotation<double> rot;
        rot.makeJacobi(a, p, q);
        a.applyOnTheLeft(p, q, rot.adjoint());
        a.applyOnTheRight(p, q, rot);
        v.applyOnTheRight(p, q, rot);
        a(p, q) = a(q, p) = 0.0;
        rotated = true;
      }
    }
    converged = !rotated;
  }
  if (!converged) {
    throw Error(ErrorKind::kNumericalFailure,
                "sym_eig: Jacobi iteration did not converge in " +
                    std::to_string(max_sweeps) + " sweeps");
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });

  SymEig out{Vector(n), Matrix(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = a(order[i], order[i]);
    out.vectors.col(i) = v.col(order[i]);
  }
  return out;
}

SymEig sym_eig(const SpdMatrix& m, int max_sweeps) { return sym_eig(m.matrix(), max_sweeps); }

SpdMatrix sqrtm(const SpdMatrix& m) {
  return spectral_apply(sym_eig(m), [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

SpdMatrix pinv(const SpdMatrix& m, double rank_tol) {
  const SymEig eig = sym_eig(m);
  const double cutoff = rank_tol * std::max(eig.values(0), 0.0);
  return spectral_apply(eig, [cutoff](double x) { return x > cutoff ? 1.0 / x : 0.0; });
}

SpdMatrix pinv_sqrtm(const SpdMatrix& m, double rank_tol) {
  const SymEig eig = sym_eig(m);
  const double cutoff = rank_tol * std::max(eig.values(0), 0.0);
  return spectral_apply(eig,
                        [cutoff](double x) { return x > cutoff ? 1.0 / std::sqrt(x) : 0.0; });
}

bool is_singular(const SpdMatrix& m, double rank_tol) {
  const SymEig eig = sym_eig(m);
  const double top = eig.values(0);
  if (top <= 0.0) return true;
  return eig.values(eig.values.size() - 1) <= rank_tol * top;
}

double spectral_radius(const SpdMatrix& m) { return sym_eig(m).values.cwiseAbs().maxCoeff(); }

}  // namespace gmmot

#include "gmmot/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/simplex.hpp"

namespace gmmot {
namespace {

constexpr double kWeightTol = 1e-9;

struct Roots {
  SpdMatrix sqrt;
  SpdMatrix inv_sqrt;
  int rank;
};

Roots spectral_roots(const SpdMatrix& m) {
  const SymEig eig = sym_eig(m);
  const double cutoff = kRankTol * std::max(eig.values(0), 0.0);
  Vector root(eig.values.size());
  Vector inv_root(eig.values.size());
  int rank = 0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i) {
    const double lambda = eig.values(i);
    root(i) = std::sqrt(std::max(lambda, 0.0));
    if (lambda > cutoff && lambda > 0.0) {
      inv_root(i) = 1.0 / root(i);
      ++rank;
    } else {
      inv_root(i) = 0.0;
    }
  }
  const Matrix& v = eig.vectors;
  return {SpdMatrix::unchecked(v * root.asDiagonal() * v.transpose()),
          SpdMatrix::unchecked(v * inv_root.asDiagonal() * v.transpose()), rank};
}

// a^{1/2}-sandwich: (r * b * r) with r symmetric.
SpdMatrix sandwich(const SpdMatrix& r, const SpdMatrix& b) {
  return SpdMatrix::unchecked(r.matrix() * b.matrix() * r.matrix());
}

void check_same_dim(const Gaussian& a, const Gaussian& b, const char* where) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                std::string(where) + ": dimensions " + std::to_string(a.dim()) + " and " +
                    std::to_string(b.dim()));
  }
}

Vector checked_weights(std::span<const Gaussian> gaussians, const Vector& weights,
                       const char* where) {
  require(!gaussians.empty(), ErrorKind::kInvalidInput,
          std::string(where) + ": no Gaussians given");
  require(static_cast<std::size_t>(weights.size()) == gaussians.size(),
          ErrorKind::kDimensionMismatch,
          std::string(where) + ": weight count does not match Gaussian count");
  for (const Gaussian& g : gaussians) check_same_dim(gaussians.front(), g, where);
  return checked_simplex(weights, kWeightTol, where);
}

// Fixed-point map R(S) = sum_j w_j (S^{1/2} Sigma_j S^{1/2})^{1/2}.
Matrix fixed_point_image(std::span<const Gaussian> gaussians, const Vector& weights,
                         const SpdMatrix& root) {
  const int d = root.dim();
  Matrix r = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < gaussians.size(); ++j) {
    const double w = weights(static_cast<Eigen::Index>(j));
    if (w == 0.0) continue;
    r += w * sqrtm(sandwich(root, gaussians[j].cov())).matrix();
  }
  return r;
}

double relative_residual(const Matrix& image, const Matrix& cov) {
  const double scale = cov.norm();
  const double diff = (image - cov).norm();
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace

Gaussian::Gaussian(Vector mean, SpdMatrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
  require(mean_.size() == cov_.dim(), ErrorKind::kDimensionMismatch,
          "Gaussian: mean has dimension " + std::to_string(mean_.size()) +
              " but covariance has dimension " + std::to_string(cov_.dim()));
  require(mean_.allFinite(), ErrorKind::kInvalidInput, "Gaussian: non-finite mean");
}

Gaussian Gaussian::standard(int dim) { return {Vector::Zero(dim), SpdMatrix::identity(dim)}; }

Gaussian Gaussian::dirac(Vector point) {
  const int d = static_cast<int>(point.size());
  return {std::move(point), SpdMatrix::zero(d)};
}

AffineMap AffineMap::identity(int dim) {
  return {Matrix::Identity(dim, dim), Vector::Zero(dim)};
}

Gaussian AffineMap::push(const Gaussian& g) const {
  require(g.dim() == dim(), ErrorKind::kDimensionMismatch, "AffineMap::push: dimension mismatch");
  return {(*this)(g.mean()),
          SpdMatrix::unchecked(linear * g.cov().matrix() * linear.transpose())};
}

double w2_gaussian_sq(const Gaussian& g0, const Gaussian& g1) {
  check_same_dim(g0, g1, "w2_gaussian_sq");
  if (g0 == g1) return 0.0;
  const double mean_term = (g0.mean() - g1.mean()).squaredNorm();
  const SpdMatrix root0 = sqrtm(g0.cov());
  const double cross = sqrtm(sandwich(root0, g1.cov())).trace();
  const double value = mean_term + g0.cov().trace() + g1.cov().trace() - 2.0 * cross;
  return std::max(value, 0.0);
}

AffineMap ot_map_gaussian(const Gaussian& g0, const Gaussian& g1) {
  check_same_dim(g0, g1, "ot_map_gaussian");
  const Roots roots0 = spectral_roots(g0.cov());
  if (roots0.rank < g0.dim()) {
    throw Error(ErrorKind::kDegenerateSource,
                "ot_map_gaussian: source covariance is singular (rank " +
                    std::to_string(roots0.rank) + " of " + std::to_string(g0.dim()) + ")");
  }
  if (g0 == g1) return AffineMap::identity(g0.dim());
  const SpdMatrix middle = sqrtm(sandwich(roots0.sqrt, g1.cov()));
  Matrix linear = roots0.inv_sqrt.matrix() * middle.matrix() * roots0.inv_sqrt.matrix();
  linear = 0.5 * (linear + linear.transpose()).eval();
  Vector offset = g1.mean() - linear * g0.mean();
  return {std::move(linear), std::move(offset)};
}

Gaussian interpolate_gaussian(const Gaussian& g0, const Gaussian& g1, double t) {
  check_same_dim(g0, g1, "interpolate_gaussian");
  require(t >= 0.0 && t <= 1.0, ErrorKind::kInvalidInput,
          "interpolate_gaussian: t must lie in [0, 1]");
  if (t == 0.0) return g0;
  if (t == 1.0) return g1;

  Vector mean = (1.0 - t) * g0.mean() + t * g1.mean();
  const int d = g0.dim();

  // Build the geodesic from whichever end has the larger rank; with a
  // full-rank start this is the usual formula, and it also covers the case of
  // a Dirac start where the forward formula would collapse.
  const Roots roots0 = spectral_roots(g0.cov());
  const Roots roots1 = spectral_roots(g1.cov());
  const bool forward = roots0.rank >= roots1.rank;
  const Gaussian& from = forward ? g0 : g1;
  const Roots& to_roots = forward ? roots1 : roots0;
  const double s = forward ? t : 1.0 - t;

  const SpdMatrix inner = pinv_sqrtm(sandwich(to_roots.sqrt, from.cov()));
  const Matrix c = to_roots.sqrt.matrix() * inner.matrix() * to_roots.sqrt.matrix();
  const Matrix a = (1.0 - s) * Matrix::Identity(d, d) + s * c;
  return {std::move(mean), SpdMatrix::unchecked(a * from.cov().matrix() * a)};
}

double barycenter_residual(std::span<const Gaussian> gaussians, const Vector& weights,
                           const SpdMatrix& cov) {
  const Vector w = checked_weights(gaussians, weights, "barycenter_residual");
  const SpdMatrix root = sqrtm(cov);
  return relative_residual(fixed_point_image(gaussians, w, root), cov.matrix());
}

Gaussian gaussian_barycenter(std::span<const Gaussian> gaussians, const Vector& weights,
                             const BarycenterOptions& options) {
  const Vector w = checked_weights(gaussians, weights, "gaussian_barycenter");
  const int d = gaussians.front().dim();

  Eigen::Index active = 0;
  Eigen::Index last_active = 0;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) > 0.0) {
      ++active;
      last_active = j;
    }
  }
  if (active == 1) return gaussians[static_cast<std::size_t>(last_active)];

  Vector mean = Vector::Zero(d);
  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < gaussians.size(); ++j) {
    mean += w(static_cast<Eigen::Index>(j)) * gaussians[j].mean();
    cov += w(static_cast<Eigen::Index>(j)) * gaussians[j].cov().matrix();
  }

  double residual = 0.0;
  for (int iter = 0; iter <= options.max_iterations; ++iter) {
    const SpdMatrix current = SpdMatrix::unchecked(cov);
    const Roots roots = spectral_roots(current);
    const Matrix image = fixed_point_image(gaussians, w, roots.sqrt);
    residual = relative_residual(image, current.matrix());
    if (residual < options.tolerance) {
      return {std::move(mean), current};
    }
    if (iter == options.max_iterations) break;
    // S <- S^{-1/2} R(S)^2 S^{-1/2}
    cov = roots.inv_sqrt.matrix() * image * image * roots.inv_sqrt.matrix();
  }
  throw Error(ErrorKind::kNumericalFailure,
              "gaussian_barycenter: fixed point did not converge in " +
                  std::to_string(options.max_iterations) + " iterations (residual " +
                  std::to_string(residual) + ")");
}

double mmw2_gaussian_sq(std::span<const Gaussian> gaussians, const Vector& weights,
                        const BarycenterOptions& options) {
  const Vector w = checked_weights(gaussians, weights, "mmw2_gaussian_sq");
  const Gaussian bary = gaussian_barycenter(gaussians, w, options);
  double total = 0.0;
  for (std::size_t j = 0; j < gaussians.size(); ++j) {
    const double wj = w(static_cast<Eigen::Index>(j));
    if (wj > 0.0) total += wj * w2_gaussian_sq(gaussians[j], bary);
  }
  return total;
}

std::vector<AffineMap> multimarginal_plan_gaussian(std::span<const Gaussian> gaussians,
                                                   const Vector& weights,
                                                   const BarycenterOptions& options) {
  const Vector w = checked_weights(gaussians, weights, "multimarginal_plan_gaussian");
  const int d = gaussians.front().dim();
  for (const Gaussian& g : gaussians) {
    if (is_singular(g.cov())) {
      throw Error(ErrorKind::kDegenerateSource,
                  "multimarginal_plan_gaussian: covariances must be positive definite");
    }
  }
  const Gaussian bary = gaussian_barycenter(gaussians, w, options);

  // S_j = Sigma_j^{1/2} (Sigma_j^{1/2} Sigma_* Sigma_j^{1/2})^{-1/2} Sigma_j^{1/2}
  std::vector<Matrix> s(gaussians.size());
  for (std::size_t j = 0; j < gaussians.size(); ++j) {
    const SpdMatrix root = sqrtm(gaussians[j].cov());
    const SpdMatrix inner = pinv_sqrtm(sandwich(root, bary.cov()));
    s[j] = root.matrix() * inner.matrix() * root.matrix();
  }
  const Matrix s0_inv = s[0].inverse();

  std::vector<AffineMap> maps;
  maps.reserve(gaussians.size());
  maps.push_back(AffineMap::identity(d));
  for (std::size_t j = 1; j < gaussians.size(); ++j) {
    Matrix linear = s[j] * s0_inv;
    Vector offset = gaussians[j].mean() - linear * gaussians[0].mean();
    maps.push_back({std::move(linear), std::move(offset)});
  }
  return maps;
}

}  // namespace gmmot

#include "gmmot/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/random.hpp"

namespace gmmot {
namespace {

// Squared distances from every point to every center (n x k).
Matrix squared_distances(const Matrix& x, const Matrix& centers) {
  const Vector x_norms = x.rowwise().squaredNorm();
  const Vector c_norms = centers.rowwise().squaredNorm();
  Matrix d = (-2.0 * x * centers.transpose()).eval();
  d.colwise() += x_norms;
  d.rowwise() += c_norms.transpose();
  return d.cwiseMax(0.0);
}

Matrix plus_plus_seeding(const Matrix& x, int k, Rng& rng) {
  const Eigen::Index n = x.rows();
  Matrix centers(k, x.cols());
  const auto first = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
  centers.row(0) = x.row(first);
  Vector closest = (x.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double target = uniform01(rng()) * total;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= closest(i);
        if (target < 0.0 && closest(i) > 0.0) {
          pick = i;
          break;
        }
      }
      while (closest(pick) == 0.0 && pick > 0) --pick;
    } else {
      pick = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n));
    }
    centers.row(c) = x.row(pick);
    closest = closest.cwiseMin((x.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

}  // namespace

KMeansResult kmeans(const PointCloud& points, int k, std::uint64_t seed, int iterations) {
  const Matrix& x = points.points();
  const Eigen::Index n = x.rows();
  require(k >= 1, ErrorKind::kInvalidInput, "kmeans: k must be positive");
  require(n >= k, ErrorKind::kInvalidInput,
          "kmeans: " + std::to_string(n) + " points for " + std::to_string(k) + " clusters");

  Rng rng(seed);
  KMeansResult out;
  out.centers = plus_plus_seeding(x, k, rng);
  out.labels.assign(static_cast<std::size_t>(n), -1);

  for (int iter = 0; iter < std::max(iterations, 1); ++iter) {
    const Matrix dist = squared_distances(x, out.centers);
    bool changed = false;
    double objective = 0.0;
    Vector own(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist.row(i).minCoeff(&best);
      // Exact distance for the objective; the expanded form above loses digits.
      own(i) = (x.row(i) - out.centers.row(best)).squaredNorm();
      objective += own(i);
      if (out.labels[static_cast<std::size_t>(i)] != best) {
        out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    out.objective.push_back(objective);
    if (!changed && iter > 0) break;

    Matrix sums = Matrix::Zero(k, x.cols());
    Vector counts = Vector::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(out.labels[static_cast<std::size_t>(i)]) += x.row(i);
      counts(out.labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int c = 0; c < k; ++c) {
      if (counts(c) > 0.0) {
        out.centers.row(c) = sums.row(c) / counts(c);
        continue;
      }
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (far < 0 || own(i) > own(far)) far = i;
      }
      taken[static_cast<std::size_t>(far)] = true;
      out.centers.row(c) = x.row(far);
    }
  }
  return out;
}

double average_log_likelihood(const Gmm& gmm, const PointCloud& points) {
  const GmmDensity density(gmm);
  Matrix logs = density.component_log_densities(points.points());
  logs.rowwise() += gmm.weights().array().log().matrix().transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < logs.rows(); ++i) total += log_sum_exp(logs.row(i).transpose());
  return total / static_cast<double>(logs.rows());
}

EmResult fit_em_traced(const PointCloud& points, int k, std::uint64_t seed,
                       const EmOptions& options) {
  const Matrix& x = points.points();
  const Eigen::Index n = x.rows();
  const int d = points.dim();
  require(k >= 1, ErrorKind::kInvalidInput, "fit_em: k must be positive");
  require(n >= k, ErrorKind::kInvalidInput,
          "fit_em: " + std::to_string(n) + " points for " + std::to_string(k) + " components");

  const Vector data_mean = x.colwise().mean();
  const Matrix centered_all = x.rowwise() - data_mean.transpose();
  const double variance = centered_all.squaredNorm() / static_cast<double>(n * d);
  const double reg = options.cov_reg.value_or(1e-6 * (variance > 0.0 ? variance : 1.0));
  require(reg >= 0.0, ErrorKind::kInvalidInput, "fit_em: cov_reg must be non-negative");
  const Matrix reg_eye = reg * Matrix::Identity(d, d);

  if (centered_all.cwiseAbs().maxCoeff() == 0.0) {
    EmResult out{Gmm(Gaussian(x.row(0).transpose(), SpdMatrix::unchecked(reg_eye))), {}, reg, true};
    return out;
  }

  // Initialization from hard k-means assignments.
  const KMeansResult init = kmeans(points, k, seed);
  Vector weights = Vector::Zero(k);
  std::vector<Vector> means(static_cast<std::size_t>(k), Vector::Zero(d));
  std::vector<Matrix> covs(static_cast<std::size_t>(k), Matrix::Zero(d, d));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(init.labels[static_cast<std::size_t>(i)]);
    weights(static_cast<Eigen::Index>(c)) += 1.0;
  }
  for (int c = 0; c < k; ++c) means[static_cast<std::size_t>(c)] = init.centers.row(c).transpose();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(init.labels[static_cast<std::size_t>(i)]);
    const Vector diff = x.row(i).transpose() - means[c];
    covs[c] += diff * diff.transpose();
  }
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    if (weights(c) > 0.0) covs[cc] /= weights(c);
    covs[cc] += reg_eye;
  }
  weights /= static_cast<double>(n);

  auto assemble = [&]() {
    std::vector<Gaussian> components;
    components.reserve(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
      components.emplace_back(means[static_cast<std::size_t>(c)],
                              SpdMatrix::unchecked(covs[static_cast<std::size_t>(c)]));
    }
    return Gmm(weights / weights.sum(), std::move(components));
  };

  EmResult out{assemble(), {}, reg, false};
  Matrix resp(n, k);
  for (int iter = 0; iter <= options.iterations; ++iter) {
    const Gmm current = assemble();
    const GmmDensity density(current);
    resp = density.component_log_densities(x);
    resp.rowwise() += current.weights().array().log().matrix().transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lse = log_sum_exp(resp.row(i).transpose());
      total += lse;
      resp.row(i) = (resp.row(i).array() - lse).exp().matrix();
    }
    const double ll = total / static_cast<double>(n);
    out.gmm = current;
    if (!out.log_likelihood.empty()) {
      const double prev = out.log_likelihood.back();
      out.log_likelihood.push_back(ll);
      if (ll - prev < options.tolerance * std::max(1.0, std::abs(prev))) {
        out.converged = true;
        break;
      }
    } else {
      out.log_likelihood.push_back(ll);
    }
    if (iter == options.iterations) break;

    // M-step.
    const Vector mass = resp.colwise().sum().transpose();
    for (int c = 0; c < k; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      if (mass(c) <= 1e-12 * static_cast<double>(n)) {
        weights(c) = 0.0;
        continue;
      }
      weights(c) = mass(c) / static_cast<double>(n);
      means[cc] = (x.transpose() * resp.col(c)) / mass(c);
      const Matrix centered = x.rowwise() - means[cc].transpose();
      covs[cc] = (centered.transpose() * resp.col(c).asDiagonal() * centered) / mass(c) + reg_eye;
    }
  }
  out.gmm = canonicalize(out.gmm);
  return out;
}

}  // namespace gmmot

#include <cmath>

#include "doctest.h"
#include "gmmot/error.hpp"
#include "gmmot/fit.hpp"
#include "oracles.hpp"

using namespace gmmot;

namespace {

PointCloud blobs(models::Rng& rng, int n) {
  std::normal_distribution<double> normal(0.0, 0.5);
  Matrix pts(n, 2);
  for (int i = 0; i < n; ++i) {
    const double c = i % 2 == 0 ? 5.0 : -5.0;
    pts(i, 0) = c + normal(rng);
    pts(i, 1) = c + normal(rng);
  }
  return PointCloud(pts);
}

}  // namespace

TEST_CASE("kmeans") {
  models::Rng rng(41);
  SUBCASE("k == n puts a center on every point") {
    const PointCloud pts(Matrix{{0.0, 0.0}, {1.0, 0.0}, {0.0, 3.0}, {5.0, 5.0}});
    const KMeansResult r = kmeans(pts, 4, 1);
    CHECK(r.objective.back() == 0.0);
  }
  SUBCASE("k = 1 gives the mean") {
    const PointCloud pts = blobs(rng, 200);
    const KMeansResult r = kmeans(pts, 1, 2);
    CHECK((r.centers.row(0).transpose() - pts.points().colwise().mean().transpose()).norm() < 1e-12);
  }
  SUBCASE("two blobs") {
    const PointCloud pts = blobs(rng, 500);
    const KMeansResult r = kmeans(pts, 2, 3);
    const double a = (r.centers.row(0) - Eigen::RowVector2d(5, 5)).norm();
    const double b = (r.centers.row(0) - Eigen::RowVector2d(-5, -5)).norm();
    // Row 0 sits on one blob, row 1 must then sit on the other.
    const Eigen::RowVector2d target = a < b ? Eigen::RowVector2d(-5, -5) : Eigen::RowVector2d(5, 5);
    CHECK(std::min(a, b) < 0.1);
    CHECK((r.centers.row(1) - target).norm() < 0.1);
  }
  SUBCASE("objective never increases") {
    models::Rng r2(44);
    const PointCloud pts = sample(models::random_gmm(r2, 2, 6, 0.3), 2000, 1);
    const KMeansResult r = kmeans(pts, 6, 4);
    for (std::size_t i = 1; i < r.objective.size(); ++i) CHECK(r.objective[i] <= r.objective[i - 1] * (1 + 1e-12));
  }
  SUBCASE("duplicated points and empty clusters") {
    const PointCloud pts(Matrix{{0.0}, {0.0}, {0.0}, {1.0}, {1.0}});
    const KMeansResult r = kmeans(pts, 3, 5);
    CHECK(r.objective.back() == 0.0);
  }
  CHECK_THROWS_AS(kmeans(PointCloud(Matrix::Zero(2, 1)), 3, 0), Error);
}

TEST_CASE("fit_em recovers a well-separated 1D mixture") {
  const Gmm truth = models::example_mu0();
  const PointCloud pts = sample(truth, 5000, 42);
  const Gmm fit = fit_em(pts, 2, 7);
  REQUIRE(fit.size() == 2);
  // canonical order sorts by mean, as is the truth.
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(fit.weight(k) - truth.weight(k)) < 0.05);
    CHECK(std::abs(fit.component(k).mean()(0) - truth.component(k).mean()(0)) < 0.01);
    CHECK(std::abs(std::sqrt(fit.component(k).cov()(0, 0)) - std::sqrt(truth.component(k).cov()(0, 0))) < 0.01);
  }
}

TEST_CASE("fit_em with k = 1 is the sample moment fit") {
  models::Rng rng(43);
  const PointCloud pts = sample(models::random_gmm(rng, 3, 3, 0.2), 1000, 3);
  EmOptions opts;
  opts.cov_reg = 1e-4;
  const Gmm fit = fit_em(pts, 1, 0, opts);
  const Vector mean = pts.points().colwise().mean();
  const Matrix centered = pts.points().rowwise() - mean.transpose();
  const Matrix cov = centered.transpose() * centered / pts.size() + 1e-4 * Matrix::Identity(3, 3);
  CHECK(fit.weight(0) == 1.0);
  CHECK((fit.component(0).mean() - mean).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fit.component(0).cov().matrix() - cov).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("fit_em log-likelihood is monotone") {
  models::Rng rng(45);
  for (int trial = 0; trial < 6; ++trial) {
    const int d = 1 + trial % 3;
    const PointCloud pts = sample(models::random_gmm(rng, d, 4, 0.1), 1500, static_cast<std::uint64_t>(trial));
    const EmResult r = fit_em_traced(pts, 4, 11);
    REQUIRE(r.log_likelihood.size() >= 2);
    for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
      CHECK(r.log_likelihood[i] >= r.log_likelihood[i - 1] - 1e-9);
    }
  }
}

TEST_CASE("fit_em determinism and degenerate input") {
  models::Rng rng(46);
  const PointCloud pts = sample(models::random_gmm(rng, 2, 3), 800, 1);
  CHECK(fit_em(pts, 3, 9) == fit_em(pts, 3, 9));

  const PointCloud same(Matrix::Constant(20, 2, 0.25));
  const EmResult r = fit_em_traced(same, 3, 0);
  CHECK(r.gmm.size() == 1);
  CHECK(r.gmm.component(0).mean() == Vector::Constant(2, 0.25));
  CHECK(r.gmm.component(0).cov().matrix() == r.cov_reg * Matrix::Identity(2, 2));
  CHECK(r.cov_reg > 0.0);

  CHECK_THROWS_AS(fit_em(PointCloud(Matrix::Zero(2, 1)), 3, 0), Error);
}

TEST_CASE("average_log_likelihood") {
  const Gmm g = models::example_mu0();
  const PointCloud pts(Matrix{{0.2}, {0.4}});
  const double expected = 0.5 * (std::log(oracle::naive_density(g, Vector::Constant(1, 0.2))) +
                                 std::log(oracle::naive_density(g, Vector::Constant(1, 0.4))));
  CHECK(average_log_likelihood(g, pts) == doctest::Approx(expected).epsilon(1e-12));
}

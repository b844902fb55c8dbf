#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gmmot/error.hpp"
#include "gmmot/gmm.hpp"
#include "oracles.hpp"

using namespace gmmot;

TEST_CASE("Gmm validation") {
  const Gaussian g = Gaussian::standard(2);
  CHECK_THROWS_AS(Gmm(Vector{{0.5, 0.6}}, {g, g}), Error);
  CHECK_THROWS_AS(Gmm(Vector{{1.5, -0.5}}, {g, g}), Error);
  CHECK_THROWS_AS(Gmm(Vector{{0.5, 0.5}}, {g, Gaussian::standard(3)}), Error);
  CHECK_THROWS_AS(Gmm(Vector{{1.0}}, {g, g}), Error);
  const Gmm ok(Vector{{0.25, 0.75}}, {g, Gaussian(Vector{{1.0, 2.0}}, SpdMatrix::identity(2))});
  CHECK(ok.mean().isApprox(Vector{{0.75, 1.5}}));
  CHECK_THROWS_AS(PointCloud(Matrix::Constant(2, 2, std::nan(""))), Error);
}

TEST_CASE("log_pdf") {
  const Gmm std1(Gaussian::standard(1));
  CHECK(log_pdf(std1, Vector::Zero(1)) == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi)).epsilon(1e-15));
  CHECK(log_pdf(std1, Vector::Zero(1)) == doctest::Approx(-0.9189385332).epsilon(1e-10));

  const Gmm dup(Vector{{0.5, 0.5}}, {Gaussian::standard(1), Gaussian::standard(1)});
  for (double x : {-2.0, 0.0, 0.7, 3.0}) {
    CHECK(log_pdf(dup, Vector::Constant(1, x)) == doctest::Approx(log_pdf(std1, Vector::Constant(1, x))).epsilon(1e-14));
  }

  const Gmm two = models::example_mu0();
  for (double x : {0.0, 0.15, 0.2, 0.3, 0.41, 0.6}) {
    const Vector v = Vector::Constant(1, x);
    const double ref = static_cast<double>(std::log(oracle::naive_density(two, v)));
    CHECK(std::abs(log_pdf(two, v) - ref) < 1e-12);
  }

  models::Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 4;
    const Gmm g = models::random_gmm(rng, d, 1 + trial % 3, 0.2);
    const Vector x = models::random_gaussian(rng, d).mean();
    const double ref = static_cast<double>(std::log(oracle::naive_density(g, x)));
    CHECK(std::abs(log_pdf(g, x) - ref) < 1e-10);
  }

  // Far in the tail the log stays finite thanks to log-sum-exp.
  CHECK(std::isfinite(log_pdf(two, Vector::Constant(1, 40.0))));

  const Gmm singular(Gaussian::dirac(Vector::Zero(2)));
  try {
    log_pdf(singular, Vector::Zero(2));
    FAIL("expected density-undefined");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDensityUndefined);
  }
}

TEST_CASE("density integrates to one") {
  const Gmm g = models::example_mu0();
  // Trapezoid over [min m - 10 s, max m + 10 s].
  const double lo = 0.2 - 10 * 0.04;
  const double hi = 0.4 + 10 * 0.04;
  const int n = 20000;
  const double h = (hi - lo) / n;
  const GmmDensity density(g);
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    total += w * std::exp(density.log_pdf(Vector::Constant(1, lo + i * h)));
  }
  CHECK(std::abs(total * h - 1.0) < 1e-6);
}

TEST_CASE("batched component densities agree with pointwise ones") {
  models::Rng rng(32);
  const Gmm g = models::random_gmm(rng, 3, 4, 0.2);
  const PointCloud pts = sample(g, 50, 1);
  const GmmDensity density(g);
  const Matrix batch = density.component_log_densities(pts.points());
  for (int i = 0; i < pts.size(); ++i) {
    CHECK((batch.row(i).transpose() - density.component_log_densities(Vector(pts.point(i)))).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("sample") {
  SUBCASE("Dirac mixture lands on the means with the right frequencies") {
    const Gmm g(Vector{{0.2, 0.5, 0.3}}, {Gaussian::dirac(Vector::Constant(1, -1.0)), Gaussian::dirac(Vector::Constant(1, 0.0)),
                                           Gaussian::dirac(Vector::Constant(1, 2.0))});
    const int n = 10000;
    const PointCloud pts = sample(g, n, 7);
    std::array<int, 3> counts{};
    for (int i = 0; i < n; ++i) {
      const double x = pts.point(i)(0);
      REQUIRE((x == -1.0 || x == 0.0 || x == 2.0));
      ++counts[x == -1.0 ? 0 : (x == 0.0 ? 1 : 2)];
    }
    double chi2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double e = n * g.weight(k);
      chi2 += (counts[static_cast<std::size_t>(k)] - e) * (counts[static_cast<std::size_t>(k)] - e) / e;
    }
    CHECK(chi2 < 13.82);  // chi-square, 2 dof, p = 0.001
  }
  SUBCASE("standard normal moments") {
    const PointCloud pts = sample(Gmm(Gaussian::standard(1)), 100000, 8);
    const double mean = pts.points().mean();
    const double var = (pts.points().array() - mean).square().mean();
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(var - 1.0) < 0.02);
  }
  SUBCASE("determinism and mixture mean") {
    models::Rng rng(33);
    const Gmm g = models::random_gmm(rng, 2, 3, 0.3);
    CHECK(sample(g, 100, 5).points() == sample(g, 100, 5).points());
    CHECK(sample(g, 100, 5).points() != sample(g, 100, 6).points());
    const int n = 100000;
    const PointCloud pts = sample(g, n, 9);
    const Vector emp = pts.points().colwise().mean();
    // Standard error from the mixture covariance.
    Matrix cov = Matrix::Zero(2, 2);
    const Vector mu = g.mean();
    for (int k = 0; k < g.size(); ++k) {
      const Vector dm = g.component(k).mean() - mu;
      cov += g.weight(k) * (g.component(k).cov().matrix() + dm * dm.transpose());
    }
    for (int c = 0; c < 2; ++c) CHECK(std::abs(emp(c) - mu(c)) < 3.0 * std::sqrt(cov(c, c) / n));
  }
}

TEST_CASE("canonicalize") {
  const Gaussian a = Gaussian::standard(1);
  const Gaussian b(Vector::Constant(1, 2.0), SpdMatrix::identity(1));
  const Gmm dup(Vector{{0.5, 0.5}}, {a, a});
  const Gmm c = canonicalize(dup);
  CHECK(c.size() == 1);
  CHECK(c.weight(0) == 1.0);

  const Gmm with_zero(Vector{{0.0, 1.0}}, {a, b});
  CHECK(canonicalize(with_zero).size() == 1);
  CHECK(canonicalize(with_zero).component(0) == b);

  const Gmm unordered(Vector{{0.4, 0.6}}, {b, a});
  const Gmm ordered = canonicalize(unordered);
  CHECK(ordered.component(0) == a);
  CHECK(ordered.weight(0) == 0.6);

  models::Rng rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const Gmm g = models::random_gmm(rng, 2, 4);
    const Gmm once = canonicalize(g);
    CHECK(canonicalize(once) == once);
    CHECK(once.size() == 4);
  }

  // Near-duplicates within the merge tolerance collapse.
  const Gaussian a2(Vector::Constant(1, 1e-13), SpdMatrix::identity(1));
  CHECK(canonicalize(Gmm(Vector{{0.3, 0.7}}, {a, a2})).size() == 1);
}

TEST_CASE("log_sum_exp") {
  CHECK(log_sum_exp(Vector{{0.0, 0.0}}) == doctest::Approx(std::log(2.0)));
  CHECK(log_sum_exp(Vector{{1000.0, 1000.0}}) == doctest::Approx(1000.0 + std::log(2.0)));
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_sum_exp(Vector{{-inf, 0.0}}) == 0.0);
  CHECK(log_sum_exp(Vector{{-inf, -inf}}) == -inf);
}

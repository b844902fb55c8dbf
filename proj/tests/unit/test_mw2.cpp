#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gmmot/error.hpp"
#include "gmmot/mw2.hpp"
#include "oracles.hpp"

using namespace gmmot;

namespace {

Gmm affine_image(const Gmm& g, const AffineMap& map) {
  std::vector<Gaussian> comps;
  for (const Gaussian& c : g.components()) comps.push_back(map.push(c));
  return Gmm(g.weights(), std::move(comps));
}

void check_same_mixture(const Gmm& a, const Gmm& b, double tol) {
  const Gmm ca = canonicalize(a);
  const Gmm cb = canonicalize(b);
  REQUIRE(ca.size() == cb.size());
  for (int k = 0; k < ca.size(); ++k) {
    CHECK(std::abs(ca.weight(k) - cb.weight(k)) < tol);
    CHECK((ca.component(k).mean() - cb.component(k).mean()).cwiseAbs().maxCoeff() < tol);
    CHECK((ca.component(k).cov().matrix() - cb.component(k).cov().matrix()).cwiseAbs().maxCoeff() < tol);
  }
}

}  // namespace

TEST_CASE("mw2 examples") {
  SUBCASE("self distance") {
    models::Rng rng(51);
    const Gmm g = models::random_gmm(rng, 2, 3);
    const Mw2Result r = mw2(g, g);
    CHECK(r.distance == 0.0);
    const Matrix w = r.plan.coupling().weights;
    CHECK((w - Matrix(w.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single Gaussians") {
    models::Rng rng(52);
    for (int d = 1; d <= 4; ++d) {
      const Gaussian a = models::random_gaussian(rng, d, 0.5);
      const Gaussian b = models::random_gaussian(rng, d, 0.5);
      CHECK(mw2(Gmm(a), Gmm(b)).distance == doctest::Approx(std::sqrt(w2_gaussian_sq(a, b))).epsilon(1e-13));
    }
  }
  SUBCASE("two one-dimensional mixtures") {
    const Mw2Result r = mw2(models::example_mu0(), models::example_mu1());
    CHECK(r.plan.support().size() == 3);
    CHECK(r.squared == doctest::Approx(0.12475).epsilon(1e-12));
    const Matrix expected{{0.3, 0.0}, {0.3, 0.4}};
    CHECK((r.plan.coupling().weights - expected).cwiseAbs().maxCoeff() < 1e-12);
    // Hand value: 0.3 (0.4^2 + 0.03^2) + 0.3 (0.2^2 + 0.02^2) + 0.4 (0.4^2 + 0.03^2).
    const double hand = 0.3 * oracle::w2_sq_1d(0.2, 0.03, 0.6, 0.06) + 0.3 * oracle::w2_sq_1d(0.4, 0.04, 0.6, 0.06) +
                        0.4 * oracle::w2_sq_1d(0.4, 0.04, 0.8, 0.07);
    CHECK(r.squared == doctest::Approx(hand).epsilon(1e-13));
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(mw2(Gmm(Gaussian::standard(1)), Gmm(Gaussian::standard(2))), Error);
  }
}

TEST_CASE("plan invariants") {
  models::Rng rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 1 + trial % 3;
    const Gmm a = models::random_gmm(rng, d, 1 + trial % 4);
    const Gmm b = models::random_gmm(rng, d, 1 + (trial + 1) % 4);
    const Mw2Result r = mw2(a, b);
    const TransportPlan& plan = r.plan;
    CHECK((plan.coupling().weights.rowwise().sum() - plan.source().weights()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((plan.coupling().weights.colwise().sum().transpose() - plan.target().weights()).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK(static_cast<int>(plan.support().size()) <= plan.source().size() + plan.target().size() - 1);
    REQUIRE(plan.maps_available());
    for (const auto& [k, l] : plan.support()) {
      const Gaussian pushed = plan.map(k, l)->push(plan.source().component(k));
      CHECK((pushed.mean() - plan.target().component(l).mean()).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((pushed.cov().matrix() - plan.target().component(l).cov().matrix()).cwiseAbs().maxCoeff() < 1e-8);
    }
    // The squared distance is the LP optimum over the pairwise cost.
    Matrix a_eq;
    Vector b_eq;
    oracle::marginal_constraints({plan.source().size(), plan.target().size()},
                                 {plan.source().weights(), plan.target().weights()}, a_eq, b_eq);
    Matrix cost(plan.source().size(), plan.target().size());
    for (int k = 0; k < cost.rows(); ++k) {
      for (int l = 0; l < cost.cols(); ++l) {
        cost(k, l) = w2_gaussian_sq(plan.source().component(k), plan.target().component(l));
      }
    }
    const Matrix cost_rm = cost.transpose();  // row-major flattening
    const Vector c = Eigen::Map<const Vector>(cost_rm.data(), cost.size());
    CHECK(r.squared == doctest::Approx(oracle::lp_vertex_min(a_eq, b_eq, c).value).epsilon(1e-10));
  }
}

TEST_CASE("singular source keeps the distance but drops maps") {
  const Gmm dirac(Gaussian::dirac(Vector::Zero(1)));
  const Gmm target(Gaussian::standard(1));
  const Mw2Result r = mw2(dirac, target);
  CHECK(r.squared == doctest::Approx(1.0));
  CHECK_FALSE(r.plan.maps_available());
  CHECK_THROWS_AS(mw2_geodesic(r.plan, 0.5), Error);
}

TEST_CASE("metric axioms on random triples") {
  models::Rng rng(54);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + trial % 3;
    const Gmm a = models::random_gmm(rng, d, 1 + trial % 4);
    const Gmm b = models::random_gmm(rng, d, 1 + (trial + 2) % 4);
    const Gmm c = models::random_gmm(rng, d, 1 + (trial + 3) % 4);
    const double ab = mw2(a, b).distance;
    const double ba = mw2(b, a).distance;
    const double bc = mw2(b, c).distance;
    const double ac = mw2(a, c).distance;
    CHECK(std::abs(ab - ba) < 1e-10);
    CHECK(ac <= ab + bc + 1e-8);
    CHECK(ab > 0.0);
    // Same mixture written differently: permuted, with a split component.
    std::vector<Gaussian> comps(a.components().rbegin(), a.components().rend());
    Vector w = a.weights().reverse();
    comps.push_back(comps.front());
    w.conservativeResize(w.size() + 1);
    w(w.size() - 1) = 0.5 * w(0);
    w(0) *= 0.5;
    CHECK(mw2(a, Gmm(w, comps)).distance == 0.0);
  }
}

TEST_CASE("geodesic") {
  const Gmm mu0 = models::example_mu0();
  const Gmm mu1 = models::example_mu1();
  const Mw2Result r = mw2(mu0, mu1);
  SUBCASE("endpoints") {
    // One component per plan pair, so compare after merging duplicates.
    check_same_mixture(mw2_geodesic(r.plan, 0.0), mu0, 1e-14);
    check_same_mixture(mw2_geodesic(r.plan, 1.0), mu1, 1e-14);
  }
  SUBCASE("single Gaussian reduces to the Gaussian interpolation") {
    models::Rng rng(55);
    const Gaussian a = models::random_gaussian(rng, 3, 0.5);
    const Gaussian b = models::random_gaussian(rng, 3, 0.5);
    const Gmm mid = mw2_geodesic(mw2(Gmm(a), Gmm(b)).plan, 0.3);
    REQUIRE(mid.size() == 1);
    const Gaussian ref = interpolate_gaussian(a, b, 0.3);
    CHECK((mid.component(0).mean() - ref.mean()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((mid.component(0).cov().matrix() - ref.cov().matrix()).cwiseAbs().maxCoeff() < 1e-10);
  }
  SUBCASE("midpoint of the one-dimensional example") {
    const Gmm mid = mw2_geodesic(r.plan, 0.5);
    CHECK(mid.size() == 3);
    CHECK(std::abs(mw2(mu0, mid).distance - 0.5 * r.distance) < 1e-6);
  }
  SUBCASE("constant speed") {
    models::Rng rng(56);
    for (int trial = 0; trial < 4; ++trial) {
      const Gmm a = models::random_gmm(rng, 2, 3);
      const Gmm b = models::random_gmm(rng, 2, 4);
      const Mw2Result ab = mw2(a, b);
      const std::array<double, 5> ts{0.0, 0.25, 0.5, 0.75, 1.0};
      for (double s : ts) {
        for (double t : ts) {
          const double dst = mw2(mw2_geodesic(ab.plan, s), mw2_geodesic(ab.plan, t)).distance;
          CHECK(std::abs(dst - std::abs(t - s) * ab.distance) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("trace bound") {
  models::Rng rng(57);
  CHECK(mw2_trace_bound(models::random_dirac_gmm(rng, 2, 3), models::random_dirac_gmm(rng, 2, 2)) == 0.0);
  CHECK(mw2_trace_bound(Gmm(Gaussian::standard(1)), Gmm(Gaussian::standard(1))) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  const double expected = std::sqrt(2 * (0.3 * 0.03 * 0.03 + 0.7 * 0.04 * 0.04)) +
                          std::sqrt(2 * (0.6 * 0.06 * 0.06 + 0.4 * 0.07 * 0.07));
  CHECK(mw2_trace_bound(models::example_mu0(), models::example_mu1()) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.0527257 + 0.0907744).epsilon(1e-6));
}

TEST_CASE("one-dimensional exact W2") {
  const Gmm mu0 = models::example_mu0();
  const Gmm mu1 = models::example_mu1();
  CHECK(w2_1d_exact(mu0, mu0) == 0.0);
  CHECK(w2_1d_exact(models::gmm_1d({1.0}, {0.0}, {1.0}), models::gmm_1d({1.0}, {2.0}, {1.0})) ==
        doctest::Approx(2.0).epsilon(1e-9));
  const double exact = w2_1d_exact(mu0, mu1);
  CHECK(std::abs(exact - oracle::w2_1d_table(mu0, mu1)) < 1e-4);
  CHECK(exact > 0.0);
  CHECK(exact <= mw2(mu0, mu1).distance);

  SUBCASE("quantiles") {
    const Gmm g = models::gmm_1d({1.0}, {0.0}, {1.0});
    CHECK(mixture_quantile_1d(g, 0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mixture_quantile_1d(g, 0.975) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    CHECK(mixture_quantile_1d(g, 0.025, true) == doctest::Approx(1.959963984540054).epsilon(1e-10));
    CHECK(mixture_quantile_1d(g, 1e-12) == doctest::Approx(-7.034483825301131).epsilon(1e-9));
  }
  SUBCASE("empirical coupling against a Gaussian") {
    // With x_i the N(0,1) mean over the quantile slice [i/n, (i+1)/n],
    // x_i = n (phi(q_i) - phi(q_{i+1})) and W2^2 = 1 - sum x_i^2 / n.
    // Shifting every x_i by one adds exactly one since sum x_i = 0.
    const Gmm g = models::gmm_1d({1.0}, {0.0}, {1.0});
    const int n = 1000;
    auto probit = [](double u) {
      double lo = -40.0;
      double hi = 40.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < u ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    };
    auto phi = [](double q) { return std::isinf(q) ? 0.0 : std::exp(-0.5 * q * q) / std::sqrt(2.0 * std::numbers::pi); };
    std::vector<double> xs;
    double sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double a = i == 0 ? -INFINITY : probit(static_cast<double>(i) / n);
      const double b = i == n - 1 ? INFINITY : probit(static_cast<double>(i + 1) / n);
      xs.push_back(n * (phi(a) - phi(b)));
      sum_sq += xs.back() * xs.back();
    }
    const double expected_sq = 1.0 - sum_sq / n;
    CHECK(w2_1d_empirical(xs, g) == doctest::Approx(std::sqrt(expected_sq)).epsilon(1e-6));
    std::vector<double> shifted = xs;
    for (double& x : shifted) x += 1.0;
    CHECK(w2_1d_empirical(shifted, g) == doctest::Approx(std::sqrt(expected_sq + 1.0)).epsilon(1e-9));
    CHECK_THROWS_AS(w2_1d_empirical(xs, Gmm(Gaussian::dirac(Vector::Zero(1)))), Error);
  }
}

TEST_CASE("sandwich between exact W2 and MW2") {
  models::Rng rng(58);
  for (int trial = 0; trial < 20; ++trial) {
    const Gmm a = models::random_gmm(rng, 1, 1 + trial % 4, 0.2);
    const Gmm b = models::random_gmm(rng, 1, 1 + (trial + 1) % 4, 0.2);
    const double w2 = w2_1d_exact(a, b);
    const double m = mw2(a, b).distance;
    CHECK(w2 <= m + 1e-4);
    CHECK(m <= w2 + mw2_trace_bound(a, b) + 1e-4);
  }
}

TEST_CASE("affine image equality case") {
  models::Rng rng(59);
  for (int d = 1; d <= 3; ++d) {
    const Gmm a = models::random_gmm(rng, d, 3, 0.1);
    AffineMap map{models::random_spd(rng, d, 1.0), models::random_gaussian(rng, d).mean()};
    const Gmm b = affine_image(a, map);
    double expected = 0.0;
    for (int k = 0; k < a.size(); ++k) expected += a.weight(k) * w2_gaussian_sq(a.component(k), b.component(k));
    const double m2 = mw2(a, b).squared;
    CHECK(m2 == doctest::Approx(expected).epsilon(1e-9));
    if (d == 1) CHECK(std::abs(std::sqrt(m2) - w2_1d_exact(a, b)) < 1e-4);
  }
}

TEST_CASE("Dirac target keeps only the source means") {
  models::Rng rng(60);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 1 + trial % 3;
    const Gmm a = models::random_gmm(rng, d, 1 + trial % 4, 0.2);
    const Gmm b = models::random_dirac_gmm(rng, d, 1 + (trial + 2) % 3);
    const Gmm ca = canonicalize(a);
    const Gmm cb = canonicalize(b);
    Matrix cost(ca.size(), cb.size());
    for (int k = 0; k < ca.size(); ++k) {
      for (int l = 0; l < cb.size(); ++l) cost(k, l) = (ca.component(k).mean() - cb.component(l).mean()).squaredNorm();
    }
    Matrix a_eq;
    Vector b_eq;
    oracle::marginal_constraints({ca.size(), cb.size()}, {ca.weights(), cb.weights()}, a_eq, b_eq);
    const Matrix cost_rm = cost.transpose();
    const Vector c = Eigen::Map<const Vector>(cost_rm.data(), cost.size());
    double traces = 0.0;
    for (int k = 0; k < ca.size(); ++k) traces += ca.weight(k) * ca.component(k).cov().trace();
    CHECK(mw2(a, b).squared == doctest::Approx(oracle::lp_vertex_min(a_eq, b_eq, c).value + traces).epsilon(1e-10));
  }
}

TEST_CASE("geodesic agrees with itself under composition") {
  // Restricting the geodesic to [0, 1/2] and reparametrizing reaches the midpoint.
  const Mw2Result r = mw2(models::example_mu0(), models::example_mu1());
  const Gmm mid = mw2_geodesic(r.plan, 0.5);
  const Gmm quarter = mw2_geodesic(r.plan, 0.25);
  const Mw2Result half = mw2(models::example_mu0(), mid);
  check_same_mixture(mw2_geodesic(half.plan, 0.5), quarter, 1e-9);
}

#include "gmmot/mw2_kl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/fit.hpp"
#include "gmmot/random.hpp"
#include "gmmot/simplex.hpp"

namespace gmmot {
namespace {

constexpr int kMaxHalvings = 60;

void check_params(const CouplingParams1D& p) {
  const auto k = p.pi.size();
  require(k >= 1 && p.m0.size() == k && p.m1.size() == k && p.s0.size() == k && p.s1.size() == k,
          ErrorKind::kDimensionMismatch, "mw2kl: parameter vectors differ in length");
  require((p.s0.array() > 0.0).all() && (p.s1.array() > 0.0).all(), ErrorKind::kInvalidInput,
          "mw2kl: standard deviations must be positive");
}

void check_cloud(const PointCloud& cloud) {
  require(cloud.dim() == 1, ErrorKind::kDimensionMismatch, "mw2kl: point clouds must be one-dimensional");
}

// n x K matrix of log N(x_i; m_k, s_k^2).
Matrix component_logs(const PointCloud& cloud, const Vector& m, const Vector& s) {
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  const auto x = cloud.points().col(0);
  Matrix out(x.size(), m.size());
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const auto z = (x.array() - m(k)) / s(k);
    out.col(k) = (-half_log_two_pi - std::log(s(k)) - 0.5 * z.square()).matrix();
  }
  return out;
}

double mean_log_likelihood(const PointCloud& cloud, const Vector& pi, const Vector& m, const Vector& s) {
  Matrix logs = component_logs(cloud, m, s);
  logs.rowwise() += pi.array().log().matrix().transpose();
  double total = 0.0;
  for (Eigen::Index i = 0; i < logs.rows(); ++i) total += log_sum_exp(logs.row(i).transpose());
  return total / static_cast<double>(logs.rows());
}

// Adds the -lambda * d(mean log p_i)/d(params) contribution of one marginal.
void add_likelihood_gradient(const PointCloud& cloud, const Vector& pi, const Vector& m, const Vector& s,
                             double lambda, Vector& g_pi, Vector& g_m, Vector& g_s) {
  const Matrix logs = component_logs(cloud, m, s);
  const Vector log_pi = pi.array().log();
  const auto x = cloud.points().col(0);
  const auto n = static_cast<double>(x.size());
  const Eigen::Index k = pi.size();
  Vector acc_pi = Vector::Zero(k);
  Vector acc_m = Vector::Zero(k);
  Vector acc_s = Vector::Zero(k);
  for (Eigen::Index i = 0; i < logs.rows(); ++i) {
    const double log_p = log_sum_exp(logs.row(i).transpose() + log_pi);
    for (Eigen::Index c = 0; c < k; ++c) {
      const double ratio = std::exp(logs(i, c) - log_p);  // g_c(x) / p(x)
      const double resp = pi(c) * ratio;
      const double dx = x(i) - m(c);
      acc_pi(c) += ratio;
      acc_m(c) += resp * dx;
      acc_s(c) += resp * (dx * dx - s(c) * s(c));
    }
  }
  g_pi -= lambda * acc_pi / n;
  g_m -= lambda * (acc_m.array() / (n * s.array().square())).matrix();
  g_s -= lambda * (acc_s.array() / (n * s.array().cube())).matrix();
}

struct Fit1D {
  std::vector<double> w;
  std::vector<double> m;
  std::vector<double> s;
};

// EM fit padded to exactly k components (sorted by mean) by splitting the
// heaviest component whenever EM returns fewer.
Fit1D initial_fit(const PointCloud& cloud, int k, std::uint64_t seed, double sigma_min) {
  const Gmm gmm = fit_em(cloud, k, seed);
  Fit1D fit;
  for (int c = 0; c < gmm.size(); ++c) {
    fit.w.push_back(gmm.weight(c));
    fit.m.push_back(gmm.component(c).mean()(0));
    fit.s.push_back(std::max(std::sqrt(gmm.component(c).cov()(0, 0)), sigma_min));
  }
  while (static_cast<int>(fit.w.size()) < k) {
    const auto h = static_cast<std::size_t>(std::max_element(fit.w.begin(), fit.w.end()) - fit.w.begin());
    const double w = 0.5 * fit.w[h];
    const double m = fit.m[h];
    const double s = fit.s[h];
    fit.w[h] = w;
    fit.m[h] = m - 0.5 * s;
    fit.w.insert(fit.w.begin() + static_cast<std::ptrdiff_t>(h) + 1, w);
    fit.m.insert(fit.m.begin() + static_cast<std::ptrdiff_t>(h) + 1, m + 0.5 * s);
    fit.s.insert(fit.s.begin() + static_cast<std::ptrdiff_t>(h) + 1, s);
  }
  return fit;
}

double pooled_std(const PointCloud& a, const PointCloud& b) {
  const auto n = static_cast<double>(a.size() + b.size());
  const double mean = (a.points().sum() + b.points().sum()) / n;
  const double ss = (a.points().array() - mean).square().sum() + (b.points().array() - mean).square().sum();
  return std::sqrt(ss / n);
}

CouplingParams1D project(CouplingParams1D p, double sigma_min) {
  p.pi = project_to_simplex(p.pi);
  p.s0 = p.s0.cwiseMax(sigma_min);
  p.s1 = p.s1.cwiseMax(sigma_min);
  return p;
}

CouplingParams1D step_along(const CouplingParams1D& p, const CouplingParams1D& g, double step) {
  return {p.pi - step * g.pi, p.m0 - step * g.m0, p.m1 - step * g.m1, p.s0 - step * g.s0,
          p.s1 - step * g.s1};
}

}  // namespace

Gmm CouplingParams1D::marginal(int i) const {
  require(i == 0 || i == 1, ErrorKind::kInvalidInput, "CouplingParams1D::marginal: index must be 0 or 1");
  check_params(*this);
  const Vector& m = i == 0 ? m0 : m1;
  const Vector& s = i == 0 ? s0 : s1;
  std::vector<Gaussian> components;
  for (int k = 0; k < size(); ++k) {
    components.emplace_back(Vector::Constant(1, m(k)), SpdMatrix::unchecked(Matrix::Constant(1, 1, s(k) * s(k))));
  }
  return Gmm(pi / pi.sum(), std::move(components));
}

double mw2kl_transport_term(const CouplingParams1D& p) {
  check_params(p);
  return (p.pi.array() * ((p.m0 - p.m1).array().square() + (p.s0 - p.s1).array().square())).sum();
}

double mw2kl_energy(const CouplingParams1D& p, const PointCloud& nu0, const PointCloud& nu1, double lambda) {
  check_params(p);
  check_cloud(nu0);
  check_cloud(nu1);
  require(lambda >= 0.0, ErrorKind::kInvalidInput, "mw2kl: lambda must be non-negative");
  double energy = mw2kl_transport_term(p);
  if (lambda > 0.0) {
    energy -= lambda * (mean_log_likelihood(nu0, p.pi, p.m0, p.s0) + mean_log_likelihood(nu1, p.pi, p.m1, p.s1));
  }
  return energy;
}

CouplingParams1D mw2kl_gradient(const CouplingParams1D& p, const PointCloud& nu0, const PointCloud& nu1,
                                double lambda) {
  check_params(p);
  check_cloud(nu0);
  check_cloud(nu1);
  require(lambda >= 0.0, ErrorKind::kInvalidInput, "mw2kl: lambda must be non-negative");
  const Vector dm = p.m0 - p.m1;
  const Vector ds = p.s0 - p.s1;
  CouplingParams1D g;
  g.pi = (dm.array().square() + ds.array().square()).matrix();
  g.m0 = 2.0 * (p.pi.array() * dm.array()).matrix();
  g.m1 = -g.m0;
  g.s0 = 2.0 * (p.pi.array() * ds.array()).matrix();
  g.s1 = -g.s0;
  if (lambda > 0.0) {
    add_likelihood_gradient(nu0, p.pi, p.m0, p.s0, lambda, g.pi, g.m0, g.s0);
    add_likelihood_gradient(nu1, p.pi, p.m1, p.s1, lambda, g.pi, g.m1, g.s1);
  }
  return g;
}

Mw2KlResult mw2kl_optimize(const PointCloud& nu0, const PointCloud& nu1, int k, double lambda,
                           const Mw2KlOptions& options) {
  check_cloud(nu0);
  check_cloud(nu1);
  require(k >= 1, ErrorKind::kInvalidInput, "mw2kl: k must be positive");
  require(lambda > 0.0, ErrorKind::kInvalidInput, "mw2kl: lambda must be positive");
  require(options.step > 0.0 && options.iterations >= 0, ErrorKind::kInvalidInput,
          "mw2kl: step must be positive and iterations non-negative");

  Mw2KlResult out;
  const double spread = pooled_std(nu0, nu1);
  out.sigma_min = 1e-4 * (spread > 0.0 ? spread : 1.0);

  const Fit1D f0 = initial_fit(nu0, k, derive_seed(options.seed, 0), out.sigma_min);
  const Fit1D f1 = initial_fit(nu1, k, derive_seed(options.seed, 1), out.sigma_min);
  CouplingParams1D p;
  p.pi.resize(k);
  p.m0.resize(k);
  p.m1.resize(k);
  p.s0.resize(k);
  p.s1.resize(k);
  for (int c = 0; c < k; ++c) {
    const auto cc = static_cast<std::size_t>(c);
    p.pi(c) = 0.5 * (f0.w[cc] + f1.w[cc]);
    p.m0(c) = f0.m[cc];
    p.m1(c) = f1.m[cc];
    p.s0(c) = f0.s[cc];
    p.s1(c) = f1.s[cc];
  }
  p = project(std::move(p), out.sigma_min);

  double energy = mw2kl_energy(p, nu0, nu1, lambda);
  if (!std::isfinite(energy)) {
    throw Error(ErrorKind::kNumericalFailure, "mw2kl: energy is not finite at iteration 0");
  }
  out.energy.push_back(energy);

  double step = options.step;
  for (int iter = 1; iter <= options.iterations; ++iter) {
    const CouplingParams1D g = mw2kl_gradient(p, nu0, nu1, lambda);
    bool accepted = false;
    bool any_finite = false;
    for (int h = 0; h <= kMaxHalvings; ++h, step *= 0.5) {
      CouplingParams1D candidate = project(step_along(p, g, step), out.sigma_min);
      const double e = mw2kl_energy(candidate, nu0, nu1, lambda);
      if (std::isnan(e)) continue;
      any_finite = true;
      if (e < energy) {
        p = std::move(candidate);
        energy = e;
        accepted = true;
        break;
      }
    }
    if (!any_finite) {
      throw Error(ErrorKind::kNumericalFailure,
                  "mw2kl: energy diverged (NaN) at iteration " + std::to_string(iter));
    }
    if (!accepted) break;  // no descent at any step size: stationary
    out.energy.push_back(energy);
    step = std::min(options.step, 2.0 * step);
  }
  out.params = std::move(p);
  return out;
}

}  // namespace gmmot

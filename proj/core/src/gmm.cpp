#include "gmmot/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/random.hpp"

namespace gmmot {
namespace {

constexpr double kZeroWeight = 1e-14;

std::vector<double> sort_key(const Gaussian& g) {
  std::vector<double> key(g.mean().data(), g.mean().data() + g.mean().size());
  const Matrix& c = g.cov().matrix();
  key.insert(key.end(), c.data(), c.data() + c.size());
  return key;
}

bool nearly_equal(const Gaussian& a, const Gaussian& b) {
  return (a.mean() - b.mean()).cwiseAbs().maxCoeff() <= kMergeTol &&
         (a.cov().matrix() - b.cov().matrix()).cwiseAbs().maxCoeff() <= kMergeTol;
}

}  // namespace

Gmm::Gmm(Vector weights, std::vector<Gaussian> components)
    : weights_(std::move(weights)), components_(std::move(components)) {
  require(!components_.empty(), ErrorKind::kInvalidInput, "Gmm: no components");
  require(static_cast<std::size_t>(weights_.size()) == components_.size(),
          ErrorKind::kDimensionMismatch, "Gmm: weight count does not match component count");
  require(weights_.allFinite() && (weights_.array() >= 0.0).all(), ErrorKind::kInvalidInput,
          "Gmm: weights must be finite and non-negative");
  const double total = weights_.sum();
  require(std::abs(total - 1.0) <= kGmmWeightTol, ErrorKind::kInvalidInput,
          "Gmm: weights sum to " + std::to_string(total));
  const int d = components_.front().dim();
  for (const Gaussian& g : components_) {
    require(g.dim() == d, ErrorKind::kDimensionMismatch, "Gmm: components differ in dimension");
  }
}

Gmm::Gmm(Gaussian single) : Gmm(Vector::Ones(1), {std::move(single)}) {}

Vector Gmm::mean() const {
  Vector m = Vector::Zero(dim());
  for (int k = 0; k < size(); ++k) m += weights_(k) * component(k).mean();
  return m;
}

PointCloud::PointCloud(Matrix points) : points_(std::move(points)) {
  require(points_.rows() >= 1 && points_.cols() >= 1, ErrorKind::kInvalidInput,
          "PointCloud: need at least one point of positive dimension");
  require(points_.allFinite(), ErrorKind::kInvalidInput, "PointCloud: non-finite coordinate");
}

double log_sum_exp(const Vector& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

GmmDensity::GmmDensity(const Gmm& gmm)
    : dim_(gmm.dim()), log_weights_(gmm.weights().array().log()), log_norm_(gmm.size()) {
  const double half_log_two_pi = 0.5 * std::log(2.0 * std::numbers::pi);
  for (int k = 0; k < gmm.size(); ++k) {
    const Gaussian& g = gmm.component(k);
    Eigen::LLT<Matrix> llt(g.cov().matrix());
    const Vector diag = llt.matrixL().toDenseMatrix().diagonal();
    if (llt.info() != Eigen::Success || (diag.array() <= 0.0).any() ||
        diag.minCoeff() <= std::sqrt(kRankTol) * diag.maxCoeff()) {
      throw Error(ErrorKind::kDensityUndefined,
                  "GmmDensity: component " + std::to_string(k) + " has a singular covariance");
    }
    log_norm_(k) = -dim_ * half_log_two_pi - diag.array().log().sum();
    means_.push_back(g.mean());
    factors_.push_back(std::move(llt));
  }
}

Vector GmmDensity::component_log_densities(const Vector& x) const {
  require(x.size() == dim_, ErrorKind::kDimensionMismatch, "GmmDensity: dimension mismatch");
  Vector out(size());
  for (int k = 0; k < size(); ++k) {
    const Vector z = factors_[static_cast<std::size_t>(k)].matrixL().solve(
        x - means_[static_cast<std::size_t>(k)]);
    out(k) = log_norm_(k) - 0.5 * z.squaredNorm();
  }
  return out;
}

Matrix GmmDensity::component_log_densities(const Matrix& points) const {
  require(points.cols() == dim_, ErrorKind::kDimensionMismatch, "GmmDensity: dimension mismatch");
  Matrix out(points.rows(), size());
  for (int k = 0; k < size(); ++k) {
    Matrix centered = (points.rowwise() - means_[static_cast<std::size_t>(k)].transpose()).transpose();
    factors_[static_cast<std::size_t>(k)].matrixL().solveInPlace(centered);
    out.col(k) = (log_norm_(k) - 0.5 * centered.colwise().squaredNorm().array()).matrix().transpose();
  }
  return out;
}

Vector GmmDensity::weighted_log_densities(const Vector& x) const {
  return component_log_densities(x) + log_weights_;
}

double GmmDensity::log_pdf(const Vector& x) const { return log_sum_exp(weighted_log_densities(x)); }

double log_pdf(const Gmm& gmm, const Vector& x) { return GmmDensity(gmm).log_pdf(x); }

PointCloud sample(const Gmm& gmm, int n, std::uint64_t seed) {
  require(n >= 1, ErrorKind::kInvalidInput, "sample: n must be positive");
  const int d = gmm.dim();
  std::vector<Matrix> factors;
  for (const Gaussian& g : gmm.components()) factors.push_back(sqrtm(g.cov()).matrix());
  std::vector<double> cumulative(static_cast<std::size_t>(gmm.size()));
  double running = 0.0;
  for (int k = 0; k < gmm.size(); ++k) {
    running += gmm.weight(k);
    cumulative[static_cast<std::size_t>(k)] = running;
  }

  Rng rng(seed);
  std::normal_distribution<double> normal;
  Matrix points(n, d);
  Vector z(d);
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(rng()) * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    int k = static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), gmm.size() - 1));
    while (gmm.weight(k) == 0.0 && k > 0) --k;
    for (int c = 0; c < d; ++c) z(c) = normal(rng);
    points.row(i) = (gmm.component(k).mean() + factors[static_cast<std::size_t>(k)] * z).transpose();
  }
  return PointCloud(std::move(points));
}

Gmm canonicalize(const Gmm& gmm) {
  struct Entry {
    double weight;
    const Gaussian* component;
    std::vector<double> key;
  };
  std::vector<Entry> entries;
  for (int k = 0; k < gmm.size(); ++k) {
    if (gmm.weight(k) <= kZeroWeight) continue;
    entries.push_back({gmm.weight(k), &gmm.component(k), sort_key(gmm.component(k))});
  }
  require(!entries.empty(), ErrorKind::kInvalidInput, "canonicalize: all weights are zero");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.key < b.key; });

  std::vector<Entry> kept;
  for (Entry& e : entries) {
    auto same = std::find_if(kept.begin(), kept.end(), [&](const Entry& k) {
      return nearly_equal(*k.component, *e.component);
    });
    if (same != kept.end()) {
      same->weight += e.weight;
    } else {
      kept.push_back(std::move(e));
    }
  }

  Vector weights(static_cast<Eigen::Index>(kept.size()));
  std::vector<Gaussian> components;
  components.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    weights(static_cast<Eigen::Index>(i)) = kept[i].weight;
    components.push_back(*kept[i].component);
  }
  return Gmm(std::move(weights), std::move(components));
}

}  // namespace gmmot

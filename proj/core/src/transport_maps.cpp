#include "gmmot/transport_maps.hpp"

#include <cmath>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/random.hpp"

namespace gmmot {
namespace {

void throw_undefined() {
  throw Error(ErrorKind::kDensityUndefined, "posterior: source density vanishes at the query point");
}

}  // namespace

PlanEvaluator::PlanEvaluator(const TransportPlan& plan)
    : plan_(plan), density_(plan.source()), pairs_(plan.support()) {
  log_pair_weights_.resize(static_cast<Eigen::Index>(pairs_.size()));
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto [k, l] = pairs_[i];
    log_pair_weights_(static_cast<Eigen::Index>(i)) = std::log(plan.weight(k, l));
    const auto& map = plan.map(k, l);
    if (!map) {
      throw Error(ErrorKind::kDegenerateSource,
                  "PlanEvaluator: no map for pair (" + std::to_string(k) + ", " + std::to_string(l) + ")");
    }
    maps_.push_back(*map);
  }
}

Vector PlanEvaluator::pair_posterior(const Vector& component_logs) const {
  Vector out(log_pair_weights_.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    out(ii) = log_pair_weights_(ii) + component_logs(pairs_[i].first);
  }
  // Dividing by the sum of shifted exponentials, rather than subtracting a
  // log-normalizer, keeps the total at one even far in the tails.
  const double top = out.maxCoeff();
  if (!std::isfinite(top)) throw_undefined();
  out = (out.array() - top).exp();
  return out / out.sum();
}

Matrix PlanEvaluator::pair_posteriors(const Matrix& points) const {
  const Matrix logs = density_.component_log_densities(points);
  Matrix out(points.rows(), log_pair_weights_.size());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out.row(r) = pair_posterior(logs.row(r).transpose()).transpose();
  }
  return out;
}

int PlanEvaluator::draw(const Vector& post, double u) const {
  double running = 0.0;
  int last = 0;
  for (Eigen::Index i = 0; i < post.size(); ++i) {
    if (post(i) <= 0.0) continue;
    last = static_cast<int>(i);
    running += post(i);
    if (u < running) return last;
  }
  return last;
}

Matrix PlanEvaluator::posterior(const Vector& x) const {
  const Vector post = pair_posterior(density_.component_log_densities(x));
  Matrix out = Matrix::Zero(plan_.source().size(), plan_.target().size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    out(pairs_[i].first, pairs_[i].second) = post(static_cast<Eigen::Index>(i));
  }
  return out;
}

Vector PlanEvaluator::t_mean(const Vector& x) const {
  const Vector post = pair_posterior(density_.component_log_densities(x));
  Vector out = Vector::Zero(x.size());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const double p = post(static_cast<Eigen::Index>(i));
    if (p > 0.0) out += p * maps_[i](x);
  }
  return out;
}

Vector PlanEvaluator::t_rand(const Vector& x, std::uint64_t seed) const {
  const Vector post = pair_posterior(density_.component_log_densities(x));
  return maps_[static_cast<std::size_t>(draw(post, uniform01(derive_seed(seed, 0))))](x);
}

Matrix PlanEvaluator::t_mean_rows(const Matrix& points) const {
  const Matrix post = pair_posteriors(points);
  Matrix out = Matrix::Zero(points.rows(), points.cols());
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const AffineMap& map = maps_[i];
    Matrix mapped = points * map.linear.transpose();
    mapped.rowwise() += map.offset.transpose();
    out += post.col(static_cast<Eigen::Index>(i)).asDiagonal() * mapped;
  }
  return out;
}

Matrix PlanEvaluator::t_rand_rows(const Matrix& points, std::uint64_t seed) const {
  const Matrix post = pair_posteriors(points);
  Matrix out(points.rows(), points.cols());
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    const double u = uniform01(derive_seed(seed, static_cast<std::uint64_t>(r)));
    const AffineMap& map = maps_[static_cast<std::size_t>(draw(post.row(r).transpose(), u))];
    out.row(r) = map(points.row(r).transpose()).transpose();
  }
  return out;
}

Matrix posterior(const TransportPlan& plan, const Vector& x) { return PlanEvaluator(plan).posterior(x); }

Vector t_mean(const TransportPlan& plan, const Vector& x) { return PlanEvaluator(plan).t_mean(x); }

Vector t_rand(const TransportPlan& plan, const Vector& x, std::uint64_t seed) {
  return PlanEvaluator(plan).t_rand(x, seed);
}

}  // namespace gmmot

#include "gmmot/multimarginal.hpp"

#include <map>
#include <string>

#include "gmmot/error.hpp"
#include "gmmot/simplex.hpp"

namespace gmmot {
namespace {

constexpr double kSupportZero = 1e-14;

// Covariance part of a tuple: barycenter covariance and the weighted sum of
// W2^2 between the centered components and the centered barycenter.
struct CovPart {
  SpdMatrix cov;
  double cost;
};

class TupleCosts {
 public:
  TupleCosts(const std::vector<Gmm>& gmms, const Vector& weights)
      : gmms_(gmms), weights_(weights) {
    for (const Gmm& g : gmms_) {
      std::vector<int> ids;
      for (const Gaussian& c : g.components()) ids.push_back(cov_id(c.cov()));
      ids_.push_back(std::move(ids));
    }
  }

  double cost(const std::vector<int>& tuple) {
    const CovPart& part = cov_part(tuple);
    const Vector mean = bary_mean(tuple);
    double total = part.cost;
    for (std::size_t j = 0; j < gmms_.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (weights_(jj) == 0.0) continue;
      total += weights_(jj) * (component(j, tuple[j]).mean() - mean).squaredNorm();
    }
    return total;
  }

  Gaussian barycenter(const std::vector<int>& tuple) {
    return {bary_mean(tuple), cov_part(tuple).cov};
  }

 private:
  const Gaussian& component(std::size_t j, int k) const { return gmms_[j].component(k); }

  int cov_id(const SpdMatrix& cov) {
    for (std::size_t i = 0; i < distinct_.size(); ++i) {
      if (distinct_[i] == cov) return static_cast<int>(i);
    }
    distinct_.push_back(cov);
    return static_cast<int>(distinct_.size() - 1);
  }

  Vector bary_mean(const std::vector<int>& tuple) const {
    Vector mean = Vector::Zero(gmms_.front().dim());
    for (std::size_t j = 0; j < gmms_.size(); ++j) {
      mean += weights_(static_cast<Eigen::Index>(j)) * component(j, tuple[j]).mean();
    }
    return mean;
  }

  const CovPart& cov_part(const std::vector<int>& tuple) {
    std::vector<int> key(tuple.size());
    for (std::size_t j = 0; j < tuple.size(); ++j) key[j] = ids_[j][static_cast<std::size_t>(tuple[j])];
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;

    const Vector zero = Vector::Zero(gmms_.front().dim());
    std::vector<Gaussian> centered;
    centered.reserve(tuple.size());
    for (std::size_t j = 0; j < tuple.size(); ++j) centered.emplace_back(zero, component(j, tuple[j]).cov());
    const Gaussian bary = gaussian_barycenter(centered, weights_);
    double cost = 0.0;
    for (std::size_t j = 0; j < centered.size(); ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      if (weights_(jj) > 0.0) cost += weights_(jj) * w2_gaussian_sq(centered[j], bary);
    }
    return memo_.emplace(std::move(key), CovPart{bary.cov(), cost}).first->second;
  }

  const std::vector<Gmm>& gmms_;
  const Vector& weights_;
  std::vector<SpdMatrix> distinct_;
  std::vector<std::vector<int>> ids_;
  std::map<std::vector<int>, CovPart> memo_;
};

struct Prepared {
  std::vector<Gmm> gmms;
  Vector weights;
};

Prepared prepare(std::span<const Gmm> gmms, const Vector& weights, const char* where) {
  require(gmms.size() >= 2, ErrorKind::kInvalidInput, std::string(where) + ": need at least two mixtures");
  require(static_cast<std::size_t>(weights.size()) == gmms.size(), ErrorKind::kDimensionMismatch,
          std::string(where) + ": one weight per mixture expected");
  Prepared out;
  out.weights = checked_simplex(weights, 1e-9, where);
  const int d = gmms.front().dim();
  std::size_t total = 1;
  for (const Gmm& g : gmms) {
    require(g.dim() == d, ErrorKind::kDimensionMismatch,
            std::string(where) + ": mixtures have different dimensions");
    out.gmms.push_back(canonicalize(g));
    total *= static_cast<std::size_t>(out.gmms.back().size());
    require(total <= kMaxMultiMarginalSize, ErrorKind::kSizeLimit,
            std::string(where) + ": product of component counts exceeds " +
                std::to_string(kMaxMultiMarginalSize));
  }
  return out;
}

MultiMarginalResult solve(const Prepared& prepared, TupleCosts& costs) {
  std::vector<int> shape;
  std::vector<Vector> marginals;
  for (const Gmm& g : prepared.gmms) {
    shape.push_back(g.size());
    marginals.push_back(g.weights());
  }
  Tensor cost(shape);
  for (std::size_t flat = 0; flat < cost.size(); ++flat) cost[flat] = costs.cost(cost.unravel(flat));
  MultiTransportSolution solution = solve_multimarginal(cost, marginals);
  return {std::max(solution.value, 0.0), std::move(solution.coupling), prepared.gmms};
}

}  // namespace

MultiMarginalResult mmw2(std::span<const Gmm> gmms, const Vector& weights) {
  const Prepared prepared = prepare(gmms, weights, "mmw2");
  TupleCosts costs(prepared.gmms, prepared.weights);
  return solve(prepared, costs);
}

BarycenterResult mw2_barycenter(std::span<const Gmm> gmms, const Vector& weights) {
  const Prepared prepared = prepare(gmms, weights, "mw2_barycenter");
  TupleCosts costs(prepared.gmms, prepared.weights);
  MultiMarginalResult mm = solve(prepared, costs);

  const auto support = mm.coupling.support(kSupportZero);
  Vector bary_weights(static_cast<Eigen::Index>(support.size()));
  std::vector<Gaussian> components;
  std::vector<std::vector<int>> tuples;
  for (std::size_t i = 0; i < support.size(); ++i) {
    tuples.push_back(mm.coupling.weights.unravel(support[i]));
    bary_weights(static_cast<Eigen::Index>(i)) = mm.coupling.weights[support[i]];
    components.push_back(costs.barycenter(tuples.back()));
  }
  bary_weights /= bary_weights.sum();
  return {Gmm(std::move(bary_weights), std::move(components)), std::move(mm.coupling), mm.cost,
          std::move(tuples)};
}

}  // namespace gmmot

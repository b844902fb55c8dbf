#include "gmmot/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gmmot/error.hpp"

namespace gmmot {

Vector checked_simplex(const Vector& weights, double tol, std::string_view what) {
  const std::string name(what);
  require(weights.size() > 0, ErrorKind::kInvalidInput, name + ": empty weight vector");
  require(weights.allFinite(), ErrorKind::kInvalidInput, name + ": non-finite weight");
  require((weights.array() >= 0.0).all(), ErrorKind::kInvalidInput,
          name + ": negative weight");
  const double total = weights.sum();
  if (std::abs(total - 1.0) > tol) {
    throw Error(ErrorKind::kInvalidInput,
                name + ": weights sum to " + std::to_string(total) + ", expected 1");
  }
  return weights / total;
}

Vector project_to_simplex(const Vector& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

}  // namespace gmmot

#include "gmmot/mw2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "gmmot/error.hpp"

namespace gmmot {
namespace {

constexpr double kPlanZero = 1e-14;
constexpr double kProbitRange = 10.0;

struct Component1D {
  double weight;
  double mean;
  double sd;
};

std::vector<Component1D> components_1d(const Gmm& gmm, const char* where) {
  require(gmm.dim() == 1, ErrorKind::kDimensionMismatch,
          std::string(where) + ": mixtures must be one-dimensional");
  std::vector<Component1D> out;
  for (int k = 0; k < gmm.size(); ++k) {
    if (gmm.weight(k) <= 0.0) continue;
    out.push_back({gmm.weight(k), gmm.component(k).mean()(0),
                   std::sqrt(std::max(gmm.component(k).cov()(0, 0), 0.0))});
  }
  return out;
}

// Lower (F) or upper (1 - F) tail mass at x.
double tail_mass(const std::vector<Component1D>& comps, double x, bool upper) {
  double total = 0.0;
  for (const Component1D& c : comps) {
    if (c.sd == 0.0) {
      total += c.weight * (upper ? (x < c.mean ? 1.0 : 0.0) : (x >= c.mean ? 1.0 : 0.0));
    } else {
      const double z = (x - c.mean) / (c.sd * std::numbers::sqrt2);
      total += c.weight * 0.5 * std::erfc(upper ? z : -z);
    }
  }
  return total;
}

double quantile(const std::vector<Component1D>& comps, double p, bool upper) {
  double lo = comps.front().mean;
  double hi = lo;
  double spread = 0.0;
  for (const Component1D& c : comps) {
    lo = std::min(lo, c.mean);
    hi = std::max(hi, c.mean);
    spread = std::max(spread, c.sd);
  }
  double width = std::max({spread, hi - lo, 1e-300});
  lo -= width;
  hi += width;
  // "left" side: F(x) < p (lower) or S(x) > p (upper).
  auto left_of = [&](double x) {
    const double m = tail_mass(comps, x, upper);
    return upper ? m > p : m < p;
  };
  for (int i = 0; i < 2000 && left_of(hi); ++i) hi += (width *= 2.0);
  width = std::max({spread, hi - lo, 1e-300});
  for (int i = 0; i < 2000 && !left_of(lo); ++i) lo -= (width *= 2.0);
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= 1e-12 * std::max(1.0, std::abs(mid)) || mid == lo || mid == hi) break;
    (left_of(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

// Partial moments E[X^p ; a < X < b] for p = 0, 1, 2 of N(m, s^2), s > 0.
struct PartialMoments {
  double m0 = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
};

PartialMoments partial_moments(const Component1D& c, double a, double b) {
  const double alpha = (a - c.mean) / c.sd;
  const double beta = (b - c.mean) / c.sd;
  const double mass = std::isinf(beta) && std::isinf(alpha)
                          ? 1.0
                          : (alpha < 0.0 && beta > 0.0 ? 1.0 - normal_cdf(alpha) - normal_cdf(-beta)
                             : beta <= 0.0           ? normal_cdf(beta) - normal_cdf(alpha)
                                                     : normal_cdf(-alpha) - normal_cdf(-beta));
  const double pa = std::isinf(alpha) ? 0.0 : normal_pdf(alpha);
  const double pb = std::isinf(beta) ? 0.0 : normal_pdf(beta);
  const double apa = std::isinf(alpha) ? 0.0 : alpha * pa;
  const double bpb = std::isinf(beta) ? 0.0 : beta * pb;
  PartialMoments out;
  out.m0 = mass;
  out.m1 = c.mean * mass + c.sd * (pa - pb);
  out.m2 = c.mean * c.mean * mass + 2.0 * c.mean * c.sd * (pa - pb) +
           c.sd * c.sd * (mass + apa - bpb);
  return out;
}

}  // namespace

TransportPlan::TransportPlan(Gmm source, Gmm target, DiscreteCoupling coupling)
    : source_(std::move(source)), target_(std::move(target)), coupling_(std::move(coupling)) {
  require(coupling_.weights.rows() == source_.size() && coupling_.weights.cols() == target_.size(),
          ErrorKind::kDimensionMismatch, "TransportPlan: coupling shape does not match mixtures");
  maps_.reserve(static_cast<std::size_t>(source_.size() * target_.size()));
  for (int k = 0; k < source_.size(); ++k) {
    for (int l = 0; l < target_.size(); ++l) {
      try {
        maps_.emplace_back(ot_map_gaussian(source_.component(k), target_.component(l)));
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kDegenerateSource) throw;
        maps_.emplace_back(std::nullopt);
      }
    }
  }
}

bool TransportPlan::maps_available() const {
  for (auto [k, l] : support()) {
    if (!map(k, l)) return false;
  }
  return true;
}

std::vector<std::pair<int, int>> TransportPlan::support() const {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k < source_.size(); ++k) {
    for (int l = 0; l < target_.size(); ++l) {
      if (weight(k, l) > kPlanZero) out.emplace_back(k, l);
    }
  }
  return out;
}

Matrix mw2_cost_matrix(const Gmm& gmm0, const Gmm& gmm1) {
  require(gmm0.dim() == gmm1.dim(), ErrorKind::kDimensionMismatch,
          "mw2: mixtures have different dimensions");
  Matrix cost(gmm0.size(), gmm1.size());
  for (int k = 0; k < gmm0.size(); ++k) {
    for (int l = 0; l < gmm1.size(); ++l) {
      cost(k, l) = w2_gaussian_sq(gmm0.component(k), gmm1.component(l));
    }
  }
  return cost;
}

Mw2Result mw2(const Gmm& gmm0, const Gmm& gmm1) {
  require(gmm0.dim() == gmm1.dim(), ErrorKind::kDimensionMismatch,
          "mw2: mixtures have different dimensions");
  Gmm source = canonicalize(gmm0);
  Gmm target = canonicalize(gmm1);
  const Matrix cost = mw2_cost_matrix(source, target);
  TransportSolution solution = solve_transport(cost, source.weights(), target.weights());
  const double squared = std::max(solution.value, 0.0);
  return {std::sqrt(squared), squared,
          TransportPlan(std::move(source), std::move(target), std::move(solution.coupling))};
}

Gmm mw2_geodesic(const TransportPlan& plan, double t) {
  require(t >= 0.0 && t <= 1.0, ErrorKind::kInvalidInput, "mw2_geodesic: t must lie in [0, 1]");
  const auto pairs = plan.support();
  const int d = plan.source().dim();
  Vector weights(static_cast<Eigen::Index>(pairs.size()));
  std::vector<Gaussian> components;
  components.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [k, l] = pairs[i];
    weights(static_cast<Eigen::Index>(i)) = plan.weight(k, l);
    const Gaussian& from = plan.source().component(k);
    if (t == 0.0) {
      components.push_back(from);
      continue;
    }
    if (t == 1.0) {
      components.push_back(plan.target().component(l));
      continue;
    }
    const auto& map = plan.map(k, l);
    if (!map) {
      throw Error(ErrorKind::kDegenerateSource,
                  "mw2_geodesic: no map for source component " + std::to_string(k) +
                      " (singular covariance)");
    }
    const Matrix a = (1.0 - t) * Matrix::Identity(d, d) + t * map->linear;
    Vector mean = (1.0 - t) * from.mean() + t * (*map)(from.mean());
    components.emplace_back(std::move(mean),
                            SpdMatrix::unchecked(a * from.cov().matrix() * a.transpose()));
  }
  weights /= weights.sum();
  return Gmm(std::move(weights), std::move(components));
}

double mw2_trace_bound(const Gmm& gmm0, const Gmm& gmm1) {
  auto term = [](const Gmm& g) {
    double total = 0.0;
    for (int k = 0; k < g.size(); ++k) total += g.weight(k) * g.component(k).cov().trace();
    return std::sqrt(2.0 * std::max(total, 0.0));
  };
  return term(gmm0) + term(gmm1);
}

double mixture_quantile_1d(const Gmm& gmm, double p, bool upper) {
  require(p > 0.0 && p < 1.0, ErrorKind::kInvalidInput,
          "mixture_quantile_1d: probability must lie in (0, 1)");
  return quantile(components_1d(gmm, "mixture_quantile_1d"), p, upper);
}

double w2_1d_exact(const Gmm& gmm0, const Gmm& gmm1, int quad_points) {
  require(quad_points >= 2, ErrorKind::kInvalidInput, "w2_1d_exact: need at least two nodes");
  const auto c0 = components_1d(gmm0, "w2_1d_exact");
  const auto c1 = components_1d(gmm1, "w2_1d_exact");
  const double h = 2.0 * kProbitRange / quad_points;
  double total = 0.0;
  for (int i = 0; i < quad_points; ++i) {
    const double s = -kProbitRange + (i + 0.5) * h;
    const bool upper = s >= 0.0;
    const double p = normal_cdf(upper ? -s : s);
    const double diff = quantile(c0, p, upper) - quantile(c1, p, upper);
    total += diff * diff * normal_pdf(s) * h;
  }
  return std::sqrt(total);
}

double w2_1d_empirical(std::vector<double> samples, const Gmm& gmm) {
  require(!samples.empty(), ErrorKind::kInvalidInput, "w2_1d_empirical: no samples");
  const auto comps = components_1d(gmm, "w2_1d_empirical");
  for (const Component1D& c : comps) {
    require(c.sd > 0.0, ErrorKind::kDensityUndefined,
            "w2_1d_empirical: components must have positive variance");
  }
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  // Quantile breakpoints q_i = Q(i / n), computed from the nearer tail.
  std::vector<double> breaks(n + 1);
  breaks.front() = -std::numeric_limits<double>::infinity();
  breaks.back() = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);
    breaks[i] = u <= 0.5 ? quantile(comps, u, false) : quantile(comps, 1.0 - u, true);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    PartialMoments m;
    for (const Component1D& c : comps) {
      const PartialMoments pm = partial_moments(c, breaks[i], breaks[i + 1]);
      m.m0 += c.weight * pm.m0;
      m.m1 += c.weight * pm.m1;
      m.m2 += c.weight * pm.m2;
    }
    const double x = samples[i];
    total += std::max(x * x * m.m0 - 2.0 * x * m.m1 + m.m2, 0.0);
  }
  return std::sqrt(total);
}

}  // namespace gmmot

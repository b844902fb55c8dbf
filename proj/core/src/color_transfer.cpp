#include "gmmot/color_transfer.hpp"

#include <algorithm>
#include <numeric>

#include "gmmot/error.hpp"
#include "gmmot/fit.hpp"
#include "gmmot/random.hpp"
#include "gmmot/transport_maps.hpp"

namespace gmmot {

PointCloud subsample(const Matrix& points, int max_points, std::uint64_t seed) {
  require(max_points >= 1, ErrorKind::kInvalidInput, "subsample: max_points must be positive");
  if (points.rows() <= max_points) return PointCloud(points);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  // Partial Fisher-Yates: the first max_points entries form the sample.
  for (int i = 0; i < max_points; ++i) {
    const auto remaining = static_cast<std::uint64_t>(order.size()) - static_cast<std::uint64_t>(i);
    const auto j = static_cast<std::size_t>(i) + static_cast<std::size_t>(rng() % remaining);
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }
  order.resize(static_cast<std::size_t>(max_points));
  std::sort(order.begin(), order.end());
  Matrix out(max_points, points.cols());
  for (int i = 0; i < max_points; ++i) out.row(i) = points.row(order[static_cast<std::size_t>(i)]);
  return PointCloud(std::move(out));
}

Image apply_color_map(const Image& source, const TransportPlan& plan, MapKind map, std::uint64_t seed) {
  require(plan.source().dim() == 3, ErrorKind::kDimensionMismatch, "apply_color_map: plan must act on RGB colors");
  const PlanEvaluator evaluator(plan);
  const Matrix colors = source.colors();
  const Matrix moved = map == MapKind::kMean ? evaluator.t_mean_rows(colors) : evaluator.t_rand_rows(colors, seed);
  Image out = Image::from_colors(moved, source.width, source.height);
  out.clamp();
  return out;
}

Image color_transfer(const Image& source, const Image& target, const ColorTransferOptions& options) {
  require(options.k >= 1, ErrorKind::kInvalidInput, "color_transfer: k must be positive");
  const std::uint64_t sub_seed = derive_seed(options.fit_seed, 0);
  const std::uint64_t em_seed = derive_seed(options.fit_seed, 1);
  const Gmm gmm0 = fit_em(subsample(source.colors(), options.max_fit_points, sub_seed), options.k, em_seed);
  const Gmm gmm1 = fit_em(subsample(target.colors(), options.max_fit_points, sub_seed), options.k, em_seed);
  const Mw2Result result = mw2(gmm0, gmm1);
  return apply_color_map(source, result.plan, options.map, options.seed);
}

}  // namespace gmmot

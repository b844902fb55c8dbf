#pragma once

#include <cstdint>

#include "gmmot/image.hpp"
#include "gmmot/mw2.hpp"

namespace gmmot {

enum class MapKind { kMean, kRand };

struct ColorTransferOptions {
  int k = 10;
  MapKind map = MapKind::kMean;
  /// Drives the pair draws of MapKind::kRand only.
  std::uint64_t seed = 0;
  /// Seed of the subsampling and EM fits. Kept apart from `seed` so the
  /// mean map does not depend on it.
  std::uint64_t fit_seed = 0;
  /// Color clouds larger than this are subsampled before EM.
  int max_fit_points = 300000;
};

/// Rows of `points`, or a seeded subsample of `max_points` of them.
PointCloud subsample(const Matrix& points, int max_points, std::uint64_t seed);

/// Moves every pixel of `source` by the map extracted from an MW2 plan
/// between color mixtures, then clamps to [0, 1].
Image apply_color_map(const Image& source, const TransportPlan& plan, MapKind map, std::uint64_t seed);

/// Fits K-component mixtures to both color distributions and transports the
/// colors of `source` towards those of `target`.
Image color_transfer(const Image& source, const Image& target, const ColorTransferOptions& options = {});

}  // namespace gmmot

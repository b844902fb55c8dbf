#pragma once

#include <cstdint>

#include "gmmot/image.hpp"

namespace gmmot {

/// Dense p x p patches, one per row. Each row lists the patch pixels in
/// raster order with the three channels interleaved (length 3 p^2).
struct PatchSet {
  int patch_size = 0;
  int width = 0;   // of the image the patches came from
  int height = 0;
  Matrix patches;
};

PatchSet extract_patches(const Image& image, int patch_size);

/// Averages overlapping patches at every pixel.
Image recompose_patches(const PatchSet& patches);

/// Asymptotic discrete spot noise: mean color plus the circular convolution
/// of the normalized, centered exemplar with one white-noise field shared by
/// the three channels. Not clamped.
Image adsn(const Image& exemplar, std::uint64_t seed);

struct TextureOptions {
  int k = 10;
  int patch_size = 3;
  std::uint64_t seed = 0;
  /// Patch clouds larger than this are subsampled before EM.
  int max_fit_points = 300000;
};

/// ADSN draw whose patches are moved by the mean MW2 map between patch
/// mixtures of the noise and of the exemplar, then recomposed and clamped.
Image texture_synthesize(const Image& exemplar, const TextureOptions& options = {});

}  // namespace gmmot

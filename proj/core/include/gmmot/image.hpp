#pragma once

#include <string>
#include <vector>

#include "gmmot/spd.hpp"

namespace gmmot {

/// RGB image with double channels, row-major, channel-interleaved.
/// Values nominally lie in [0, 1] but intermediate results may leave it.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Image() = default;
  Image(int w, int h, double fill = 0.0);

  int pixels() const { return width * height; }
  double& at(int x, int y, int c) { return values[index(x, y, c)]; }
  double at(int x, int y, int c) const { return values[index(x, y, c)]; }

  /// pixels() x 3 matrix, one color per row in raster order.
  Matrix colors() const;
  static Image from_colors(const Matrix& colors, int width, int height);

  void clamp();

 private:
  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3 +
           static_cast<std::size_t>(c);
  }
};

/// 8-bit PNG input. Gray images are expanded to RGB; images with an alpha
/// channel are rejected (kIo).
Image load_png(const std::string& path);
/// Writes an 8-bit RGB PNG after clamping to [0, 1] and rounding.
void save_png(const Image& image, const std::string& path);

}  // namespace gmmot

#include "gmmot/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "gmmot/error.hpp"

namespace gmmot {

Image::Image(int w, int h, double fill) : width(w), height(h) {
  require(w > 0 && h > 0, ErrorKind::kInvalidInput, "Image: dimensions must be positive");
  values.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, fill);
}

Matrix Image::colors() const {
  Matrix out(pixels(), 3);
  for (int i = 0; i < pixels(); ++i) {
    for (int c = 0; c < 3; ++c) out(i, c) = values[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(c)];
  }
  return out;
}

Image Image::from_colors(const Matrix& colors, int width, int height) {
  Image out(width, height);
  require(colors.rows() == out.pixels() && colors.cols() == 3, ErrorKind::kDimensionMismatch,
          "Image::from_colors: expected one RGB row per pixel");
  for (int i = 0; i < out.pixels(); ++i) {
    for (int c = 0; c < 3; ++c) out.values[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(c)] = colors(i, c);
  }
  return out;
}

void Image::clamp() {
  for (double& v : values) v = std::clamp(v, 0.0, 1.0);
}

Image load_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw Error(ErrorKind::kIo, "load_png: " + path + ": " + png.message);
  }
  if (png.format & PNG_FORMAT_FLAG_ALPHA) {
    png_image_free(&png);
    throw Error(ErrorKind::kIo, "load_png: " + path + ": alpha channel not supported");
  }
  png.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, "load_png: " + path + ": " + png.message);
  }
  Image out(static_cast<int>(png.width), static_cast<int>(png.height));
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] = buffer[i] / 255.0;
  return out;
}

void save_png(const Image& image, const std::string& path) {
  require(image.width > 0 && image.height > 0 && image.values.size() == static_cast<std::size_t>(image.pixels()) * 3,
          ErrorKind::kInvalidInput, "save_png: malformed image");
  std::vector<png_byte> buffer(image.values.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<png_byte>(std::lround(std::clamp(image.values[i], 0.0, 1.0) * 255.0));
  }
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::kIo, "save_png: " + path + ": " + png.message);
  }
}

}  // namespace gmmot

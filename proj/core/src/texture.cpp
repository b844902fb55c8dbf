#include "gmmot/texture.hpp"

#include <fftw3.h>

#include <cmath>
#include <memory>
#include <random>

#include "gmmot/color_transfer.hpp"
#include "gmmot/error.hpp"
#include "gmmot/fit.hpp"
#include "gmmot/mw2.hpp"
#include "gmmot/random.hpp"
#include "gmmot/transport_maps.hpp"

namespace gmmot {
namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

struct PlanDeleter {
  void operator()(fftw_plan p) const { fftw_destroy_plan(p); }
};
using Plan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, PlanDeleter>;

}  // namespace

PatchSet extract_patches(const Image& image, int patch_size) {
  const int p = patch_size;
  require(p >= 1 && p <= image.width && p <= image.height, ErrorKind::kInvalidInput,
          "extract_patches: image smaller than the patch size");
  const int nx = image.width - p + 1;
  const int ny = image.height - p + 1;
  PatchSet out{p, image.width, image.height, Matrix(static_cast<Eigen::Index>(nx) * ny, 3 * p * p)};
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * nx + x;
      int col = 0;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          for (int c = 0; c < 3; ++c) out.patches(row, col++) = image.at(x + dx, y + dy, c);
        }
      }
    }
  }
  return out;
}

Image recompose_patches(const PatchSet& set) {
  const int p = set.patch_size;
  const int nx = set.width - p + 1;
  const int ny = set.height - p + 1;
  require(p >= 1 && nx >= 1 && ny >= 1 && set.patches.rows() == static_cast<Eigen::Index>(nx) * ny &&
              set.patches.cols() == 3 * p * p,
          ErrorKind::kDimensionMismatch, "recompose_patches: patch matrix does not match the image geometry");
  Image sum(set.width, set.height);
  std::vector<int> count(static_cast<std::size_t>(sum.pixels()), 0);
  for (int y = 0; y < ny; ++y) {
    for (int x = 0; x < nx; ++x) {
      const Eigen::Index row = static_cast<Eigen::Index>(y) * nx + x;
      int col = 0;
      for (int dy = 0; dy < p; ++dy) {
        for (int dx = 0; dx < p; ++dx) {
          ++count[static_cast<std::size_t>((y + dy) * set.width + x + dx)];
          for (int c = 0; c < 3; ++c) sum.at(x + dx, y + dy, c) += set.patches(row, col++);
        }
      }
    }
  }
  for (int i = 0; i < sum.pixels(); ++i) {
    for (int c = 0; c < 3; ++c) sum.values[static_cast<std::size_t>(i) * 3 + static_cast<std::size_t>(c)] /= count[static_cast<std::size_t>(i)];
  }
  return sum;
}

Image adsn(const Image& u, std::uint64_t seed) {
  const int w = u.width;
  const int h = u.height;
  require(w >= 1 && h >= 1, ErrorKind::kInvalidInput, "adsn: empty image");
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t half = static_cast<std::size_t>(h) * static_cast<std::size_t>(w / 2 + 1);

  FftwBuffer<double> real(fftw_alloc_real(n));
  FftwBuffer<fftw_complex> noise_hat(fftw_alloc_complex(half));
  FftwBuffer<fftw_complex> spot_hat(fftw_alloc_complex(half));
  const Plan forward_noise(fftw_plan_dft_r2c_2d(h, w, real.get(), noise_hat.get(), FFTW_ESTIMATE));
  const Plan forward_spot(fftw_plan_dft_r2c_2d(h, w, real.get(), spot_hat.get(), FFTW_ESTIMATE));
  const Plan backward(fftw_plan_dft_c2r_2d(h, w, spot_hat.get(), real.get(), FFTW_ESTIMATE));
  require(forward_noise && forward_spot && backward, ErrorKind::kNumericalFailure, "adsn: FFT planning failed");

  Rng rng(seed);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < n; ++i) real[i] = normal(rng);
  fftw_execute(forward_noise.get());

  Image out(w, h);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int c = 0; c < 3; ++c) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += u.values[i * 3 + static_cast<std::size_t>(c)];
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) real[i] = (u.values[i * 3 + static_cast<std::size_t>(c)] - mean) * scale;
    fftw_execute(forward_spot.get());
    for (std::size_t i = 0; i < half; ++i) {
      const double re = spot_hat[i][0] * noise_hat[i][0] - spot_hat[i][1] * noise_hat[i][1];
      const double im = spot_hat[i][0] * noise_hat[i][1] + spot_hat[i][1] * noise_hat[i][0];
      spot_hat[i][0] = re;
      spot_hat[i][1] = im;
    }
    fftw_execute(backward.get());  // unnormalized inverse: divide by n
    for (std::size_t i = 0; i < n; ++i) out.values[i * 3 + static_cast<std::size_t>(c)] = mean + real[i] / static_cast<double>(n);
  }
  return out;
}

Image texture_synthesize(const Image& exemplar, const TextureOptions& options) {
  require(options.k >= 1, ErrorKind::kInvalidInput, "texture_synthesize: k must be positive");
  const Image noise = adsn(exemplar, derive_seed(options.seed, 0));
  const PatchSet target = extract_patches(exemplar, options.patch_size);
  PatchSet source = extract_patches(noise, options.patch_size);

  const Gmm gmm0 = fit_em(subsample(source.patches, options.max_fit_points, derive_seed(options.seed, 1)),
                          options.k, derive_seed(options.seed, 2));
  const Gmm gmm1 = fit_em(subsample(target.patches, options.max_fit_points, derive_seed(options.seed, 3)),
                          options.k, derive_seed(options.seed, 4));
  const Mw2Result result = mw2(gmm0, gmm1);
  source.patches = PlanEvaluator(result.plan).t_mean_rows(source.patches);
  Image out = recompose_patches(source);
  out.clamp();
  return out;
}

}  // namespace gmmot

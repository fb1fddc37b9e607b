#include "curation/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "curation/error.hpp"

namespace curation {

double compression_ratio(const ImageMeta& meta) {
  if (meta.width == 0 || meta.height == 0 || meta.channels == 0 || meta.bit_depth == 0) {
    throw Error(ErrorCode::kInvalidMeta, "zero dimension in compression_ratio");
  }
  const double theoretical = static_cast<double>(meta.width) * meta.height * meta.channels *
                             meta.bit_depth / 8.0;
  return static_cast<double>(meta.encoded_size) / theoretical;
}

std::uint32_t default_band_width(std::uint32_t width, std::uint32_t height) {
  const std::uint32_t shortest = std::min(width, height);
  const auto scaled = static_cast<std::uint32_t>(std::lround(0.02 * shortest));
  const std::uint32_t band = std::max<std::uint32_t>(2, scaled);
  return std::max<std::uint32_t>(1, std::min(band, shortest / 2));
}

double luma(const PixelBuffer& pixels, std::uint32_t x, std::uint32_t y) {
  if (pixels.channels() == 1) return pixels.at(x, y, 0);
  return 0.299 * pixels.at(x, y, 0) + 0.587 * pixels.at(x, y, 1) + 0.114 * pixels.at(x, y, 2);
}

double edge_pixel_variance(const PixelBuffer& pixels, std::uint32_t band_width) {
  if (pixels.width() == 0 || pixels.height() == 0 || pixels.samples.empty()) {
    throw Error(ErrorCode::kEmptyImage, "edge_pixel_variance on empty image");
  }
  const std::uint32_t w = pixels.width(), h = pixels.height();
  if (band_width < 1 || band_width > std::min(w, h) / 2) {
    throw Error(ErrorCode::kBandTooWide, "band " + std::to_string(band_width) + " for " +
                                             std::to_string(w) + "x" + std::to_string(h));
  }
  const PixelBuffer px = to_8bit(pixels);

  // Two passes: mean, then squared deviations.
  double sum = 0.0;
  std::size_t count = 0;
  auto visit = [&](auto&& fn) {
    for (std::uint32_t y = 0; y < h; ++y) {
      const bool row_in_band = y < band_width || y >= h - band_width;
      if (row_in_band) {
        for (std::uint32_t x = 0; x < w; ++x) fn(x, y);
      } else {
        for (std::uint32_t x = 0; x < band_width; ++x) fn(x, y);
        for (std::uint32_t x = w - band_width; x < w; ++x) fn(x, y);
      }
    }
  };
  visit([&](std::uint32_t x, std::uint32_t y) {
    sum += luma(px, x, y);
    ++count;
  });
  const double mean = sum / static_cast<double>(count);
  double sq = 0.0;
  visit([&](std::uint32_t x, std::uint32_t y) {
    const double d = luma(px, x, y) - mean;
    sq += d * d;
  });
  return sq / static_cast<double>(count);
}

double bpp_complexity(const PixelBuffer& pixels, int jpeg_quality) {
  const Bytes encoded = encode_jpeg(pixels, jpeg_quality);
  return 8.0 * static_cast<double>(encoded.size()) /
         (static_cast<double>(pixels.width()) * pixels.height());
}

}  // namespace curation

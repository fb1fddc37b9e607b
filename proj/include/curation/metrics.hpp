#pragma once

#include <cstdint>

#include "curation/image.hpp"

namespace curation {

inline constexpr int kDefaultJpegQuality = 75;

// encoded_size / (width * height * channels * bit_depth / 8). Lower values
// mean heavier compression. Throws InvalidMeta on a zero dimension.
double compression_ratio(const ImageMeta& meta);

// max(2, round(0.02 * min(width, height))), additionally clamped to the
// largest band the image admits.
std::uint32_t default_band_width(std::uint32_t width, std::uint32_t height);

// Rec. 601 luma of one pixel. Alpha is ignored; 1-channel input is returned
// as-is. Samples are expected in the 8-bit domain.
double luma(const PixelBuffer& pixels, std::uint32_t x, std::uint32_t y);

// Population variance of luma over every pixel whose distance to the nearest
// border is < band_width. 16-bit input is reduced to 8 bits first.
double edge_pixel_variance(const PixelBuffer& pixels, std::uint32_t band_width);

// 8 * bytes / (width * height) after re-encoding as baseline 4:2:0 JPEG.
double bpp_complexity(const PixelBuffer& pixels, int jpeg_quality = kDefaultJpegQuality);

}  // namespace curation

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curation/util.hpp"

namespace curation {

enum class ImageFormat { kJpeg, kPng, kWebp, kOther };

std::string_view format_name(ImageFormat format);

struct ImageMeta {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t channels = 0;   // 1, 3 or 4
  std::uint32_t bit_depth = 0;  // 8 or 16
  std::uint64_t encoded_size = 0;
  ImageFormat format = ImageFormat::kOther;

  friend bool operator==(const ImageMeta&, const ImageMeta&) = default;
};

// Throws InvalidMeta when a field violates the ImageMeta invariants.
void validate_meta(const ImageMeta& meta);

// Row-major, channel-interleaved samples. 8-bit and 16-bit content share the
// same storage; every sample is in [0, 2^bit_depth - 1].
struct PixelBuffer {
  ImageMeta meta;
  std::vector<std::uint16_t> samples;

  std::uint32_t width() const { return meta.width; }
  std::uint32_t height() const { return meta.height; }
  std::uint32_t channels() const { return meta.channels; }

  std::uint16_t at(std::uint32_t x, std::uint32_t y, std::uint32_t c) const {
    return samples[(static_cast<std::size_t>(y) * meta.width + x) * meta.channels + c];
  }
};

// Builds an 8-bit buffer; meta.encoded_size is set to the raw sample count so
// the result satisfies the ImageMeta invariants before any encoding happens.
PixelBuffer make_pixels(std::uint32_t width, std::uint32_t height, std::uint32_t channels,
                        std::vector<std::uint16_t> samples, std::uint32_t bit_depth = 8);

// Throws InvalidMeta when samples disagree with the declared shape or range.
void validate_pixels(const PixelBuffer& pixels);

// Right-shifts 16-bit samples to 8 bits; 8-bit buffers are returned unchanged.
PixelBuffer to_8bit(const PixelBuffer& pixels);

// One curated image. The blob is the encoded container; blob_ref is where it
// came from (a path relative to the corpus root, or a URI).
struct ImageRecord {
  std::string record_id;
  std::string blob_ref;
  Bytes blob;
  std::string provenance;
};

struct DecodeOptions {
  bool enable_webp = false;
};

// Reads dimensions, channel count and bit depth from the container header
// without decoding pixel data.
ImageMeta decode_metadata(std::span<const std::uint8_t> blob, const DecodeOptions& options = {});

// Full decode to a PixelBuffer whose meta carries the container-declared
// values. Errors: UnsupportedFormat, CorruptHeader, DecodeFailure.
PixelBuffer decode_pixels(std::span<const std::uint8_t> blob);

Bytes encode_png(const PixelBuffer& pixels);

// Baseline JPEG, 4:2:0 chroma subsampling for colour input. 16-bit input is
// reduced to 8 bits and alpha is dropped before encoding.
Bytes encode_jpeg(const PixelBuffer& pixels, int quality);

// Nearest-neighbour downscale so that the longer side is at most max_side.
PixelBuffer downscale(const PixelBuffer& pixels, std::uint32_t max_side);

}  // namespace curation

#include "curation/image.hpp"

#include <jpeglib.h>
#include <png.h>
#include <zlib.h>

#include <algorithm>
#include <csetjmp>
#include <cstdio>
#include <cstring>

#include "curation/error.hpp"

namespace curation {

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

std::uint32_t read_be16(const std::uint8_t* p) { return (std::uint32_t{p[0]} << 8) | p[1]; }

std::uint32_t read_le32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

std::uint32_t read_le24(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16);
}

bool is_png(std::span<const std::uint8_t> blob) {
  return blob.size() >= 8 && std::memcmp(blob.data(), kPngSignature, 8) == 0;
}

bool is_jpeg(std::span<const std::uint8_t> blob) {
  return blob.size() >= 3 && blob[0] == 0xFF && blob[1] == 0xD8 && blob[2] == 0xFF;
}

bool is_webp(std::span<const std::uint8_t> blob) {
  return blob.size() >= 12 && std::memcmp(blob.data(), "RIFF", 4) == 0 &&
         std::memcmp(blob.data() + 8, "WEBP", 4) == 0;
}

ImageMeta png_metadata(std::span<const std::uint8_t> blob) {
  // Signature, IHDR length + type, 13 data bytes, CRC.
  if (blob.size() < 8 + 8 + 13 + 4) throw Error(ErrorCode::kCorruptHeader, "PNG too short for IHDR");
  const std::uint8_t* ihdr = blob.data() + 8;
  if (read_be32(ihdr) != 13 || std::memcmp(ihdr + 4, "IHDR", 4) != 0) {
    throw Error(ErrorCode::kCorruptHeader, "PNG first chunk is not IHDR");
  }
  const std::uint32_t crc_stored = read_be32(ihdr + 8 + 13);
  const std::uint32_t crc = static_cast<std::uint32_t>(crc32(0L, ihdr + 4, 4 + 13));
  if (crc != crc_stored) throw Error(ErrorCode::kCorruptHeader, "PNG IHDR CRC mismatch");

  const std::uint8_t* data = ihdr + 8;
  ImageMeta meta;
  meta.width = read_be32(data);
  meta.height = read_be32(data + 4);
  const std::uint8_t depth = data[8];
  const std::uint8_t color_type = data[9];
  switch (color_type) {
    case 0: meta.channels = 1; break;
    case 2: meta.channels = 3; break;
    case 3: meta.channels = 3; break;
    case 4: meta.channels = 4; break;  // gray+alpha is expanded to RGBA
    case 6: meta.channels = 4; break;
    default: throw Error(ErrorCode::kCorruptHeader, "PNG colour type " + std::to_string(color_type));
  }
  if (depth != 1 && depth != 2 && depth != 4 && depth != 8 && depth != 16) {
    throw Error(ErrorCode::kCorruptHeader, "PNG bit depth " + std::to_string(depth));
  }
  meta.bit_depth = (depth == 16 && color_type != 3) ? 16 : 8;
  meta.encoded_size = blob.size();
  meta.format = ImageFormat::kPng;
  if (meta.width == 0 || meta.height == 0) throw Error(ErrorCode::kCorruptHeader, "PNG zero dimension");
  return meta;
}

ImageMeta jpeg_metadata(std::span<const std::uint8_t> blob) {
  std::size_t pos = 2;
  while (pos + 4 <= blob.size()) {
    if (blob[pos] != 0xFF) throw Error(ErrorCode::kCorruptHeader, "JPEG marker expected");
    std::uint8_t marker = blob[pos + 1];
    if (marker == 0xFF) {  // fill byte
      ++pos;
      continue;
    }
    if (marker == 0x01 || (marker >= 0xD0 && marker <= 0xD7)) {
      pos += 2;
      continue;
    }
    if (marker == 0xD9 || marker == 0xDA) break;
    const std::uint32_t length = read_be16(blob.data() + pos + 2);
    if (length < 2 || pos + 2 + length > blob.size()) {
      throw Error(ErrorCode::kCorruptHeader, "JPEG segment overruns blob");
    }
    const bool is_sof = marker >= 0xC0 && marker <= 0xCF && marker != 0xC4 && marker != 0xC8 &&
                        marker != 0xCC;
    if (is_sof) {
      if (length < 8) throw Error(ErrorCode::kCorruptHeader, "JPEG SOF too short");
      const std::uint8_t* sof = blob.data() + pos + 4;
      ImageMeta meta;
      const std::uint8_t precision = sof[0];
      meta.height = read_be16(sof + 1);
      meta.width = read_be16(sof + 3);
      meta.channels = sof[5];
      if (precision != 8) {
        throw Error(ErrorCode::kUnsupportedFormat, "JPEG precision " + std::to_string(precision));
      }
      if (meta.channels != 1 && meta.channels != 3 && meta.channels != 4) {
        throw Error(ErrorCode::kUnsupportedFormat,
                    "JPEG component count " + std::to_string(meta.channels));
      }
      if (meta.width == 0 || meta.height == 0) {
        throw Error(ErrorCode::kCorruptHeader, "JPEG zero dimension");
      }
      meta.bit_depth = 8;
      meta.encoded_size = blob.size();
      meta.format = ImageFormat::kJpeg;
      return meta;
    }
    pos += 2 + length;
  }
  throw Error(ErrorCode::kCorruptHeader, "JPEG has no frame header");
}

ImageMeta webp_metadata(std::span<const std::uint8_t> blob) {
  if (blob.size() < 30) throw Error(ErrorCode::kCorruptHeader, "WEBP too short");
  const std::uint8_t* chunk = blob.data() + 12;
  ImageMeta meta;
  meta.bit_depth = 8;
  meta.encoded_size = blob.size();
  meta.format = ImageFormat::kWebp;
  if (std::memcmp(chunk, "VP8X", 4) == 0) {
    const std::uint8_t flags = chunk[8];
    meta.channels = (flags & 0x10) ? 4 : 3;
    meta.width = read_le24(chunk + 12) + 1;
    meta.height = read_le24(chunk + 15) + 1;
  } else if (std::memcmp(chunk, "VP8L", 4) == 0) {
    if (chunk[8] != 0x2F) throw Error(ErrorCode::kCorruptHeader, "VP8L signature");
    const std::uint32_t bits = read_le32(chunk + 9);
    meta.width = (bits & 0x3FFF) + 1;
    meta.height = ((bits >> 14) & 0x3FFF) + 1;
    meta.channels = ((bits >> 28) & 1) ? 4 : 3;
  } else if (std::memcmp(chunk, "VP8 ", 4) == 0) {
    const std::uint8_t* frame = chunk + 8;
    if (frame[3] != 0x9D || frame[4] != 0x01 || frame[5] != 0x2A) {
      throw Error(ErrorCode::kCorruptHeader, "VP8 start code");
    }
    meta.width = (frame[6] | (frame[7] << 8)) & 0x3FFF;
    meta.height = (frame[8] | (frame[9] << 8)) & 0x3FFF;
    meta.channels = 3;
  } else {
    throw Error(ErrorCode::kCorruptHeader, "unknown WEBP chunk");
  }
  if (meta.width == 0 || meta.height == 0) throw Error(ErrorCode::kCorruptHeader, "WEBP zero dimension");
  return meta;
}

struct PngReadState {
  std::span<const std::uint8_t> blob;
  std::size_t pos = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t count) {
  auto* state = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (state->pos + count > state->blob.size()) png_error(png, "read past end of blob");
  std::memcpy(out, state->blob.data() + state->pos, count);
  state->pos += count;
}

void png_quiet_warning(png_structp, png_const_charp) {}

// Runs the libpng read; returns an error message or nullptr. Only plain
// locals live across the setjmp.
const char* png_read_rows(PngReadState* state, png_bytep* rows, std::size_t expected_row_bytes) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_quiet_warning);
  if (!png) return "png_create_read_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png_create_info_struct failed";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "libpng decode error";
  }
  png_set_read_fn(png, state, png_read_from_span);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (!(color_type & PNG_COLOR_MASK_ALPHA)) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  if (png_get_rowbytes(png, info) != expected_row_bytes) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "unexpected PNG row layout";
  }
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return nullptr;
}

PixelBuffer decode_png(std::span<const std::uint8_t> blob, const ImageMeta& meta) {
  PixelBuffer out;
  out.meta = meta;
  out.samples.resize(static_cast<std::size_t>(meta.width) * meta.height * meta.channels);
  PngReadState state{blob, 0};
  const std::uint32_t bytes_per_sample = meta.bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(meta.width) * meta.channels * bytes_per_sample;
  std::vector<std::uint8_t> image(row_bytes * meta.height);
  std::vector<png_bytep> rows(meta.height);
  for (std::uint32_t y = 0; y < meta.height; ++y) rows[y] = image.data() + y * row_bytes;

  if (const char* err = png_read_rows(&state, rows.data(), row_bytes)) {
    throw Error(ErrorCode::kDecodeFailure, err);
  }
  if (bytes_per_sample == 2) {
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
      out.samples[i] = static_cast<std::uint16_t>((image[2 * i] << 8) | image[2 * i + 1]);
    }
  } else {
    std::copy(image.begin(), image.end(), out.samples.begin());
  }
  return out;
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_quiet_output(j_common_ptr) {}

// Decodes into dst_base. CMYK is converted to RGB with an opaque fourth
// channel. Returns false with err->message filled on failure.
bool jpeg_read_rows(std::span<const std::uint8_t> blob, const ImageMeta* meta, std::uint8_t* row,
                    std::uint16_t* dst_base, JpegErrorManager* err) {
  jpeg_decompress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->base.output_message = jpeg_quiet_output;
  if (setjmp(err->jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, blob.data(), static_cast<unsigned long>(blob.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (meta->channels == 1) cinfo.out_color_space = JCS_GRAYSCALE;
  else if (meta->channels == 3) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  if (cinfo.output_width != meta->width || cinfo.output_height != meta->height ||
      static_cast<std::uint32_t>(cinfo.output_components) != meta->channels) {
    jpeg_destroy_decompress(&cinfo);
    std::snprintf(err->message, sizeof(err->message), "JPEG output shape disagrees with header");
    return false;
  }
  const bool adobe_cmyk = cinfo.out_color_space == JCS_CMYK && cinfo.saw_Adobe_marker;
  const std::size_t row_samples = static_cast<std::size_t>(meta->width) * meta->channels;
  while (cinfo.output_scanline < cinfo.output_height) {
    const std::uint32_t y = cinfo.output_scanline;
    JSAMPROW row_ptr = row;
    jpeg_read_scanlines(&cinfo, &row_ptr, 1);
    std::uint16_t* dst = dst_base + static_cast<std::size_t>(y) * row_samples;
    if (meta->channels == 4) {
      for (std::uint32_t x = 0; x < meta->width; ++x) {
        const std::uint8_t* px = row + 4 * x;
        const int k = adobe_cmyk ? px[3] : 255 - px[3];
        for (int c = 0; c < 3; ++c) {
          const int ink = adobe_cmyk ? px[c] : 255 - px[c];
          dst[4 * x + c] = static_cast<std::uint16_t>((ink * k + 127) / 255);
        }
        dst[4 * x + 3] = 255;
      }
    } else {
      for (std::size_t i = 0; i < row_samples; ++i) dst[i] = row[i];
    }
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

PixelBuffer decode_jpeg(std::span<const std::uint8_t> blob, const ImageMeta& meta) {
  PixelBuffer out;
  out.meta = meta;
  out.samples.resize(static_cast<std::size_t>(meta.width) * meta.height * meta.channels);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(meta.width) * meta.channels);
  JpegErrorManager err{};
  if (!jpeg_read_rows(blob, &meta, row.data(), out.samples.data(), &err)) {
    throw Error(ErrorCode::kDecodeFailure, std::string("libjpeg: ") + err.message);
  }
  return out;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

std::string_view format_name(ImageFormat format) {
  switch (format) {
    case ImageFormat::kJpeg: return "JPEG";
    case ImageFormat::kPng: return "PNG";
    case ImageFormat::kWebp: return "WEBP";
    case ImageFormat::kOther: return "OTHER";
  }
  return "OTHER";
}

void validate_meta(const ImageMeta& meta) {
  if (meta.width == 0 || meta.height == 0) throw Error(ErrorCode::kInvalidMeta, "zero dimension");
  if (meta.encoded_size == 0) throw Error(ErrorCode::kInvalidMeta, "zero encoded size");
  if (meta.channels != 1 && meta.channels != 3 && meta.channels != 4) {
    throw Error(ErrorCode::kInvalidMeta, "channels must be 1, 3 or 4");
  }
  if (meta.bit_depth != 8 && meta.bit_depth != 16) {
    throw Error(ErrorCode::kInvalidMeta, "bit depth must be 8 or 16");
  }
}

PixelBuffer make_pixels(std::uint32_t width, std::uint32_t height, std::uint32_t channels,
                        std::vector<std::uint16_t> samples, std::uint32_t bit_depth) {
  PixelBuffer out;
  out.meta.width = width;
  out.meta.height = height;
  out.meta.channels = channels;
  out.meta.bit_depth = bit_depth;
  out.meta.encoded_size = static_cast<std::uint64_t>(width) * height * channels * bit_depth / 8;
  out.meta.format = ImageFormat::kOther;
  out.samples = std::move(samples);
  validate_pixels(out);
  return out;
}

void validate_pixels(const PixelBuffer& pixels) {
  const ImageMeta& m = pixels.meta;
  if (m.width == 0 || m.height == 0) throw Error(ErrorCode::kEmptyImage, "zero-area pixel buffer");
  validate_meta(m);
  const std::size_t expected = static_cast<std::size_t>(m.width) * m.height * m.channels;
  if (pixels.samples.size() != expected) {
    throw Error(ErrorCode::kInvalidMeta, "sample count " + std::to_string(pixels.samples.size()) +
                                             " != " + std::to_string(expected));
  }
  const std::uint32_t max_value = (1u << m.bit_depth) - 1;
  for (auto s : pixels.samples) {
    if (s > max_value) throw Error(ErrorCode::kInvalidMeta, "sample exceeds bit depth");
  }
}

PixelBuffer to_8bit(const PixelBuffer& pixels) {
  if (pixels.meta.bit_depth == 8) return pixels;
  PixelBuffer out = pixels;
  out.meta.bit_depth = 8;
  for (auto& s : out.samples) s = static_cast<std::uint16_t>(s >> 8);
  return out;
}

ImageMeta decode_metadata(std::span<const std::uint8_t> blob, const DecodeOptions& options) {
  if (blob.empty()) throw Error(ErrorCode::kCorruptHeader, "empty blob");
  if (is_png(blob)) return png_metadata(blob);
  if (is_jpeg(blob)) return jpeg_metadata(blob);
  if (is_webp(blob)) {
    if (!options.enable_webp) throw Error(ErrorCode::kUnsupportedFormat, "WEBP support disabled");
    return webp_metadata(blob);
  }
  if (blob.size() < 8) throw Error(ErrorCode::kCorruptHeader, "blob too short to identify");
  throw Error(ErrorCode::kUnsupportedFormat, "unrecognised container");
}

PixelBuffer decode_pixels(std::span<const std::uint8_t> blob) {
  const ImageMeta meta = decode_metadata(blob);
  if (meta.format == ImageFormat::kPng) return decode_png(blob, meta);
  if (meta.format == ImageFormat::kJpeg) return decode_jpeg(blob, meta);
  throw Error(ErrorCode::kUnsupportedFormat, "no pixel decoder for " + std::string(format_name(meta.format)));
}

namespace {

const char* png_write_rows(Bytes* out, const ImageMeta* m, png_bytep* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, png_quiet_warning);
  if (!png) return "png_create_write_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return "png_create_info_struct failed";
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return "libpng encode error";
  }
  const int color_type = m->channels == 1 ? PNG_COLOR_TYPE_GRAY
                         : m->channels == 3 ? PNG_COLOR_TYPE_RGB
                                            : PNG_COLOR_TYPE_RGB_ALPHA;
  png_set_write_fn(png, out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, m->width, m->height, static_cast<int>(m->bit_depth), color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return nullptr;
}

struct JpegTarget {
  unsigned char* buffer = nullptr;
  unsigned long size = 0;
};

bool jpeg_write_rows(const PixelBuffer* px, int out_channels, int quality, std::uint8_t* row,
                     JpegTarget* target, JpegErrorManager* err) {
  const ImageMeta& m = px->meta;
  jpeg_compress_struct cinfo{};
  cinfo.err = jpeg_std_error(&err->base);
  err->base.error_exit = jpeg_error_exit;
  err->base.output_message = jpeg_quiet_output;
  if (setjmp(err->jump)) {
    jpeg_destroy_compress(&cinfo);
    return false;
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &target->buffer, &target->size);
  cinfo.image_width = m.width;
  cinfo.image_height = m.height;
  cinfo.input_components = out_channels;
  cinfo.in_color_space = out_channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  if (out_channels == 3) {
    // 4:2:0: luma at full resolution, both chroma planes halved in each axis.
    cinfo.comp_info[0].h_samp_factor = 2;
    cinfo.comp_info[0].v_samp_factor = 2;
    cinfo.comp_info[1].h_samp_factor = 1;
    cinfo.comp_info[1].v_samp_factor = 1;
    cinfo.comp_info[2].h_samp_factor = 1;
    cinfo.comp_info[2].v_samp_factor = 1;
  }
  cinfo.optimize_coding = FALSE;
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    const std::size_t y = cinfo.next_scanline;
    const std::uint16_t* src = px->samples.data() + y * m.width * m.channels;
    for (std::uint32_t x = 0; x < m.width; ++x) {
      for (int c = 0; c < out_channels; ++c) {
        row[x * static_cast<std::uint32_t>(out_channels) + static_cast<std::uint32_t>(c)] =
            static_cast<std::uint8_t>(src[x * m.channels + static_cast<std::uint32_t>(c)]);
      }
    }
    JSAMPROW row_ptr = row;
    jpeg_write_scanlines(&cinfo, &row_ptr, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
  return true;
}

}  // namespace

Bytes encode_png(const PixelBuffer& pixels) {
  validate_pixels(pixels);
  const ImageMeta& m = pixels.meta;
  const std::uint32_t bytes_per_sample = m.bit_depth == 16 ? 2 : 1;
  const std::size_t row_bytes = static_cast<std::size_t>(m.width) * m.channels * bytes_per_sample;
  std::vector<std::uint8_t> image(row_bytes * m.height);
  for (std::size_t i = 0; i < pixels.samples.size(); ++i) {
    if (bytes_per_sample == 2) {
      image[2 * i] = static_cast<std::uint8_t>(pixels.samples[i] >> 8);
      image[2 * i + 1] = static_cast<std::uint8_t>(pixels.samples[i] & 0xFF);
    } else {
      image[i] = static_cast<std::uint8_t>(pixels.samples[i]);
    }
  }
  std::vector<png_bytep> rows(m.height);
  for (std::uint32_t y = 0; y < m.height; ++y) rows[y] = image.data() + y * row_bytes;
  Bytes out;
  if (const char* err = png_write_rows(&out, &m, rows.data())) throw Error(ErrorCode::kEncodeFailure, err);
  return out;
}

Bytes encode_jpeg(const PixelBuffer& pixels, int quality) {
  if (quality < 1 || quality > 100) {
    throw Error(ErrorCode::kEncodeFailure, "JPEG quality " + std::to_string(quality) + " outside [1,100]");
  }
  validate_pixels(pixels);
  const PixelBuffer px = to_8bit(pixels);
  const int out_channels = px.meta.channels == 1 ? 1 : 3;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(px.meta.width) * static_cast<std::size_t>(out_channels));
  JpegTarget target;
  JpegErrorManager err{};
  const bool ok = jpeg_write_rows(&px, out_channels, quality, row.data(), &target, &err);
  Bytes out;
  if (ok) out.assign(target.buffer, target.buffer + target.size);
  std::free(target.buffer);
  if (!ok) throw Error(ErrorCode::kEncodeFailure, std::string("libjpeg: ") + err.message);
  return out;
}

PixelBuffer downscale(const PixelBuffer& pixels, std::uint32_t max_side) {
  const std::uint32_t w = pixels.width(), h = pixels.height();
  const std::uint32_t longest = std::max(w, h);
  if (longest <= max_side) return pixels;
  const std::uint32_t nw = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::uint64_t{w} * max_side / longest));
  const std::uint32_t nh = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::uint64_t{h} * max_side / longest));
  const std::uint32_t ch = pixels.channels();
  std::vector<std::uint16_t> samples(static_cast<std::size_t>(nw) * nh * ch);
  for (std::uint32_t y = 0; y < nh; ++y) {
    const std::uint32_t sy = static_cast<std::uint32_t>(std::uint64_t{y} * h / nh);
    for (std::uint32_t x = 0; x < nw; ++x) {
      const std::uint32_t sx = static_cast<std::uint32_t>(std::uint64_t{x} * w / nw);
      for (std::uint32_t c = 0; c < ch; ++c) {
        samples[(static_cast<std::size_t>(y) * nw + x) * ch + c] = pixels.at(sx, sy, c);
      }
    }
  }
  return make_pixels(nw, nh, ch, std::move(samples), pixels.meta.bit_depth);
}

}  // namespace curation

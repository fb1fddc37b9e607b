#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "curation/captions.hpp"
#include "curation/embedding.hpp"
#include "curation/image.hpp"
#include "curation/manifest.hpp"
#include "curation/util.hpp"

namespace fixtures {

using curation::Bytes;
using curation::PixelBuffer;

inline PixelBuffer constant_image(std::uint32_t w, std::uint32_t h, std::uint32_t ch, std::uint16_t value) {
  return curation::make_pixels(w, h, ch, std::vector<std::uint16_t>(std::size_t{w} * h * ch, value));
}

inline PixelBuffer noise_image(std::uint32_t w, std::uint32_t h, std::uint32_t ch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint16_t> s(std::size_t{w} * h * ch);
  for (auto& v : s) v = static_cast<std::uint16_t>(rng() & 0xFF);
  return curation::make_pixels(w, h, ch, std::move(s));
}

inline PixelBuffer gradient_image(std::uint32_t w, std::uint32_t h) {
  std::vector<std::uint16_t> s;
  s.reserve(std::size_t{w} * h * 3);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      s.push_back(static_cast<std::uint16_t>(255 * x / std::max(1u, w - 1)));
      s.push_back(static_cast<std::uint16_t>(255 * y / std::max(1u, h - 1)));
      s.push_back(128);
    }
  }
  return curation::make_pixels(w, h, 3, std::move(s));
}

// Smooth low-frequency structure, a few hard-edged shapes and mild sensor
// noise: compresses like a photograph rather than like noise or flat color.
inline PixelBuffer natural_image(std::uint32_t w, std::uint32_t h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 6.0);
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 4; ++i) waves.push_back({u(rng) * 4.0, u(rng) * 4.0, u(rng) * 6.283, 20.0 + 30.0 * u(rng)});
  struct Disc {
    double cx, cy, r;
    double rgb[3];
  };
  std::vector<Disc> discs;
  for (int i = 0; i < 5; ++i) {
    discs.push_back({u(rng) * w, u(rng) * h, (0.08 + 0.2 * u(rng)) * std::min(w, h),
                     {255 * u(rng), 255 * u(rng), 255 * u(rng)}});
  }
  const double base[3] = {60 + 120 * u(rng), 60 + 120 * u(rng), 60 + 120 * u(rng)};
  std::vector<std::uint16_t> s;
  s.reserve(std::size_t{w} * h * 3);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      double shade = 0.0;
      for (const auto& wv : waves) {
        shade += wv.amp * std::sin(6.283 * (wv.fx * x / w + wv.fy * y / h) + wv.phase);
      }
      const Disc* top = nullptr;
      for (const auto& d : discs) {
        if (std::hypot(x - d.cx, y - d.cy) < d.r) top = &d;
      }
      for (int c = 0; c < 3; ++c) {
        double v = (top ? top->rgb[c] : base[c]) + shade * (0.6 + 0.2 * c) + noise(rng);
        s.push_back(static_cast<std::uint16_t>(std::clamp(std::lround(v), 0L, 255L)));
      }
    }
  }
  return curation::make_pixels(w, h, 3, std::move(s));
}

// Solid frame of the given width around an otherwise natural image.
inline PixelBuffer framed_image(std::uint32_t w, std::uint32_t h, std::uint32_t frame, std::uint64_t seed) {
  PixelBuffer p = natural_image(w, h, seed);
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      if (x < frame || y < frame || x >= w - frame || y >= h - frame) {
        for (std::uint32_t c = 0; c < 3; ++c) p.samples[(std::size_t{y} * w + x) * 3 + c] = 250;
      }
    }
  }
  return p;
}

// Independent oracle: enumerate border coordinates directly, then
// two-pass population variance of Rec.601 luma in long double.
inline double brute_edge_variance(const PixelBuffer& p, std::uint32_t band) {
  const std::uint32_t w = p.meta.width, h = p.meta.height, ch = p.meta.channels;
  const int shift = p.meta.bit_depth == 16 ? 8 : 0;
  std::vector<long double> lumas;
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const bool border = x < band || y < band || x + band >= w || y + band >= h;
      if (!border) continue;
      auto at = [&](std::uint32_t c) { return static_cast<long double>(p.samples[(std::size_t{y} * w + x) * ch + c] >> shift); };
      lumas.push_back(ch >= 3 ? 0.299L * at(0) + 0.587L * at(1) + 0.114L * at(2) : at(0));
    }
  }
  long double mean = 0;
  for (auto v : lumas) mean += v;
  mean /= lumas.size();
  long double var = 0;
  for (auto v : lumas) var += (v - mean) * (v - mean);
  return static_cast<double>(var / lumas.size());
}

inline PixelBuffer rotate90(const PixelBuffer& p) {
  const std::uint32_t w = p.meta.width, h = p.meta.height, ch = p.meta.channels;
  std::vector<std::uint16_t> s(p.samples.size());
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      const std::uint32_t nx = h - 1 - y, ny = x;  // new width is h
      for (std::uint32_t c = 0; c < ch; ++c) s[(std::size_t{ny} * h + nx) * ch + c] = p.samples[(std::size_t{y} * w + x) * ch + c];
    }
  }
  return curation::make_pixels(h, w, ch, std::move(s), p.meta.bit_depth);
}

inline PixelBuffer flip_horizontal(const PixelBuffer& p) {
  const std::uint32_t w = p.meta.width, h = p.meta.height, ch = p.meta.channels;
  std::vector<std::uint16_t> s(p.samples.size());
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      for (std::uint32_t c = 0; c < ch; ++c) s[(std::size_t{y} * w + (w - 1 - x)) * ch + c] = p.samples[(std::size_t{y} * w + x) * ch + c];
    }
  }
  return curation::make_pixels(w, h, ch, std::move(s), p.meta.bit_depth);
}

inline PixelBuffer flip_vertical(const PixelBuffer& p) {
  const std::uint32_t w = p.meta.width, h = p.meta.height, ch = p.meta.channels;
  std::vector<std::uint16_t> s(p.samples.size());
  for (std::uint32_t y = 0; y < h; ++y) {
    for (std::uint32_t x = 0; x < w; ++x) {
      for (std::uint32_t c = 0; c < ch; ++c) s[(std::size_t{h - 1 - y} * w + x) * ch + c] = p.samples[(std::size_t{y} * w + x) * ch + c];
    }
  }
  return curation::make_pixels(w, h, ch, std::move(s), p.meta.bit_depth);
}

// Independent cosine in long double.
inline double brute_cosine(const std::vector<float>& a, const std::vector<float>& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / std::sqrt(na * nb));
}

inline curation::EmbeddingVector unit(std::vector<double> raw, curation::Modality m = curation::Modality::kImage) {
  curation::EmbeddingVector v;
  v.values = curation::normalize(std::span<const double>(raw));
  v.modality = m;
  v.provider_id = "test";
  return v;
}

inline curation::EmbeddingVector stub_text(const std::string& text, std::size_t dim = curation::kStubDimension) {
  curation::StubEmbeddingProvider p(dim);
  curation::EmbeddingVector v;
  const auto raw = p.embed(curation::Modality::kText,
                           std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  v.values = curation::normalize(std::span<const float>(raw));
  v.modality = curation::Modality::kText;
  v.provider_id = p.id();
  return v;
}

// Unit vector at cosine `target` from `base` (both unit), turned toward a
// random orthogonal direction.
inline std::vector<float> perturb(const std::vector<float>& base, double target, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> r(base.size());
  double dot = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = g(rng);
    dot += r[i] * base[i];
  }
  double norm = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] -= dot * base[i];
    norm += r[i] * r[i];
  }
  norm = std::sqrt(norm);
  const double s = std::sqrt(1.0 - target * target);
  std::vector<double> out(base.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = target * base[i] + s * r[i] / norm;
  return curation::normalize(std::span<const double>(out));
}

// Caption with every schema dimension filled.
inline curation::StructuredCaption full_caption(const std::string& id, curation::PrimaryCategory category) {
  curation::StructuredCaption c;
  c.record_id = id;
  c.category = category;
  for (const auto& d : curation::attribute_schema(category).dimensions) c.attributes[d] = d + " of " + id;
  c.updated_at = 1'700'000'000'000;
  return c;
}

// Patch that keeps the caption valid: sets any schema dimensions, removes only
// optional attributes that are present and not being set.
inline curation::CaptionPatch random_valid_patch(const curation::StructuredCaption& c, std::mt19937_64& rng) {
  const auto& schema = curation::attribute_schema(c.category);
  curation::CaptionPatch p;
  for (const auto& d : schema.dimensions) {
    if (rng() % 3 == 0) p.set[d] = "text-" + std::to_string(rng() % 100000);
  }
  for (const auto& [key, value] : c.attributes) {
    if (!schema.requires_attribute(key) && !p.set.count(key) && rng() % 3 == 0) p.remove.push_back(key);
  }
  return p;
}

// Blob-free manifest with `per_cell` records for every (task, category) pair,
// in an interleaved order so no task is contiguous.
inline curation::Manifest synthetic_manifest(std::size_t per_cell) {
  curation::Manifest m;
  m.metadata = {{"fixture", "synthetic"}};
  for (std::size_t i = 0; i < per_cell; ++i) {
    for (auto category : curation::kAllCategories) {
      for (auto task : curation::kAllTasks) {
        curation::ManifestEntry e;
        char id[48];
        std::snprintf(id, sizeof id, "%s-%s-%05zu", std::string(curation::task_name(task)).c_str(),
                      std::string(curation::category_name(category)).c_str(), i);
        e.record_id = id;
        e.blob_ref = e.record_id + ".png";
        e.task = task;
        e.category = category;
        m.entries.push_back(std::move(e));
      }
    }
  }
  return m;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("curation-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

enum class Kind { kNatural, kConstant, kNoise, kGradient, kFramed, kLowQualityJpeg, kJpeg };

inline const char* kind_name(Kind k) {
  switch (k) {
    case Kind::kNatural: return "natural";
    case Kind::kConstant: return "constant";
    case Kind::kNoise: return "noise";
    case Kind::kGradient: return "gradient";
    case Kind::kFramed: return "framed";
    case Kind::kLowQualityJpeg: return "lowq";
    case Kind::kJpeg: return "jpeg";
  }
  return "?";
}

inline Bytes encode(Kind kind, std::uint32_t w, std::uint32_t h, std::uint64_t seed) {
  switch (kind) {
    case Kind::kNatural: return curation::encode_png(natural_image(w, h, seed));
    case Kind::kConstant: return curation::encode_png(constant_image(w, h, 3, static_cast<std::uint16_t>(seed % 256)));
    case Kind::kNoise: return curation::encode_png(noise_image(w, h, 3, seed));
    case Kind::kGradient: return curation::encode_png(gradient_image(w, h));
    case Kind::kFramed: return curation::encode_png(framed_image(w, h, std::max(3u, std::min(w, h) / 10), seed));
    case Kind::kLowQualityJpeg: return curation::encode_jpeg(natural_image(w, h, seed), 8);
    case Kind::kJpeg: return curation::encode_jpeg(natural_image(w, h, seed), 92);
  }
  return {};
}

// Writes `count` images of mixed kinds, sizes, tasks and categories under dir
// and returns their manifest (blob_ref relative to dir).
inline curation::Manifest mixed_corpus(const std::filesystem::path& dir, std::size_t count, std::uint64_t seed) {
  static constexpr Kind kinds[] = {Kind::kNatural, Kind::kNatural, Kind::kJpeg,     Kind::kJpeg,
                                   Kind::kConstant, Kind::kNoise,  Kind::kGradient, Kind::kFramed,
                                   Kind::kLowQualityJpeg};
  std::mt19937_64 rng(seed);
  curation::Manifest m;
  m.metadata = {{"fixture", "mixed"}, {"seed", seed}};
  for (std::size_t i = 0; i < count; ++i) {
    const Kind kind = kinds[rng() % std::size(kinds)];
    const auto w = static_cast<std::uint32_t>(24 + rng() % 72);
    const auto h = static_cast<std::uint32_t>(24 + rng() % 72);
    const bool jpeg = kind == Kind::kJpeg || kind == Kind::kLowQualityJpeg;
    char id[32];
    std::snprintf(id, sizeof id, "rec-%04zu", i);
    const std::string ref = std::string(id) + "-" + kind_name(kind) + (jpeg ? ".jpg" : ".png");
    curation::write_file((dir / ref).string(), encode(kind, w, h, rng()));
    curation::ManifestEntry e;
    e.record_id = id;
    e.blob_ref = ref;
    e.task = curation::kAllTasks[rng() % 4];
    e.category = curation::kAllCategories[rng() % 5];
    m.entries.push_back(std::move(e));
  }
  return m;
}

}  // namespace fixtures

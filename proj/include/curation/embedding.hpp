#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "curation/image.hpp"
#include "curation/util.hpp"
#include "json.hpp"

namespace curation {

enum class Modality { kImage, kText };

std::string_view modality_name(Modality m);
Modality parse_modality(std::string_view text);

// Unit-norm dense vector. Everything the gateway hands out is normalized.
struct EmbeddingVector {
  std::vector<float> values;
  Modality modality = Modality::kImage;
  std::string provider_id;

  std::size_t dim() const { return values.size(); }
};

inline constexpr double kUnitNormTolerance = 1e-6;

double l2_norm(std::span<const float> v);

// Scales `raw` to unit length. Throws DegenerateAggregate when the norm is
// below 1e-9.
std::vector<float> normalize(std::span<const double> raw);
std::vector<float> normalize(std::span<const float> raw);

// Dot product accumulated in double. Throws DimensionMismatch.
double cosine(std::span<const float> a, std::span<const float> b);
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dim() const = 0;
  // Raw (not necessarily normalized) vector for the content. Throws
  // ProviderUnavailable on failure.
  virtual std::vector<float> embed(Modality modality, std::span<const std::uint8_t> content) const = 0;
};

inline constexpr std::size_t kStubDimension = 512;

// Expands SHA-256(content) into `dim` uniform reals in [-1, 1) using
// SHA-256(digest || block counter) as the stream. Image and text content share
// one space: the same bytes produce the same vector regardless of modality.
class StubEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit StubEmbeddingProvider(std::size_t dim = kStubDimension) : dim_(dim) {}
  std::string id() const override { return "stub-sha256-" + std::to_string(dim_); }
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(Modality modality, std::span<const std::uint8_t> content) const override;

 private:
  std::size_t dim_;
};

// HTTP POST {modality, content: base64} -> {dim, values[]}.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::string url, std::size_t dim, int timeout_seconds = 10)
      : url_(std::move(url)), dim_(dim), timeout_seconds_(timeout_seconds) {}
  std::string id() const override { return "remote:" + url_; }
  std::size_t dim() const override { return dim_; }
  std::vector<float> embed(Modality modality, std::span<const std::uint8_t> content) const override;

 private:
  std::string url_;
  std::size_t dim_;
  int timeout_seconds_;
};

struct EmbeddingCacheEntry {
  std::string content_hash;  // hex SHA-256 of the raw bytes
  EmbeddingVector vector;
  std::int64_t created_at = 0;  // epoch ms
};

// Content-addressed vector cache. Safe for concurrent use; a store replaces
// any existing entry for the same key.
class EmbeddingCache {
 public:
  std::optional<EmbeddingVector> lookup(const std::string& content_hash, Modality modality) const;
  void store(EmbeddingCacheEntry entry);
  std::size_t size() const;

  // One JSON object per line: key, modality, provider_id, created_at, values.
  void save(const std::string& path) const;
  static EmbeddingCache load(const std::string& path);

  EmbeddingCache() = default;
  EmbeddingCache(EmbeddingCache&& other) noexcept;
  EmbeddingCache& operator=(EmbeddingCache&&) = delete;

 private:
  mutable std::shared_mutex mutex_;
  std::map<std::pair<Modality, std::string>, EmbeddingCacheEntry> entries_;
};

class EmbeddingGateway {
 public:
  explicit EmbeddingGateway(std::shared_ptr<const EmbeddingProvider> provider,
                            std::shared_ptr<EmbeddingCache> cache = std::make_shared<EmbeddingCache>());

  // Validates that the blob is a decodable image container before embedding.
  EmbeddingVector embed_image(std::span<const std::uint8_t> blob);
  EmbeddingVector embed_image(const PixelBuffer& pixels);
  EmbeddingVector embed_text(std::string_view text);

  std::size_t dim() const { return provider_->dim(); }
  const EmbeddingProvider& provider() const { return *provider_; }
  EmbeddingCache& cache() { return *cache_; }
  std::uint64_t provider_calls() const { return provider_calls_.load(); }

 private:
  EmbeddingVector embed_content(Modality modality, std::span<const std::uint8_t> content);

  std::shared_ptr<const EmbeddingProvider> provider_;
  std::shared_ptr<EmbeddingCache> cache_;
  std::atomic<std::uint64_t> provider_calls_{0};
};

nlohmann::json to_json(const EmbeddingVector& v);
EmbeddingVector embedding_from_json(const nlohmann::json& j);

}  // namespace curation

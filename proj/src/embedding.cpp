#include "curation/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>

#include "curation/error.hpp"
#include "curation/remote.hpp"

namespace curation {

std::string_view modality_name(Modality m) { return m == Modality::kImage ? "IMAGE" : "TEXT"; }

Modality parse_modality(std::string_view text) {
  if (text == "IMAGE" || text == "image") return Modality::kImage;
  if (text == "TEXT" || text == "text") return Modality::kText;
  throw Error(ErrorCode::kParseError, "unknown modality '" + std::string(text) + "'");
}

double l2_norm(std::span<const float> v) {
  double sq = 0.0;
  for (float x : v) sq += static_cast<double>(x) * x;
  return std::sqrt(sq);
}

std::vector<float> normalize(std::span<const double> raw) {
  double sq = 0.0;
  for (double x : raw) sq += x * x;
  const double n = std::sqrt(sq);
  if (!(n >= 1e-9)) throw Error(ErrorCode::kDegenerateAggregate, "vector norm below 1e-9");
  std::vector<float> out(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) out[i] = static_cast<float>(raw[i] / n);
  return out;
}

std::vector<float> normalize(std::span<const float> raw) {
  std::vector<double> wide(raw.begin(), raw.end());
  return normalize(std::span<const double>(wide));
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += static_cast<double>(a[i]) * b[i];
  return std::clamp(dot, -1.0, 1.0);
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) { return cosine(a.values, b.values); }

std::vector<float> StubEmbeddingProvider::embed(Modality, std::span<const std::uint8_t> content) const {
  const Digest root = sha256(content);
  std::vector<float> out;
  out.reserve(dim_);
  std::uint32_t block = 0;
  while (out.size() < dim_) {
    std::uint8_t input[36];
    std::copy(root.begin(), root.end(), input);
    input[32] = static_cast<std::uint8_t>(block);
    input[33] = static_cast<std::uint8_t>(block >> 8);
    input[34] = static_cast<std::uint8_t>(block >> 16);
    input[35] = static_cast<std::uint8_t>(block >> 24);
    const Digest chunk = sha256(std::span<const std::uint8_t>(input, 36));
    for (int word = 0; word < 8 && out.size() < dim_; ++word) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits = (bits << 8) | chunk[static_cast<std::size_t>(word * 4 + b)];
      // 24 high bits -> exactly representable float in [-1, 1).
      out.push_back(static_cast<float>(static_cast<std::int32_t>(bits >> 8) - (1 << 23)) * 0x1.0p-23f);
    }
    ++block;
  }
  return out;
}

std::vector<float> RemoteEmbeddingProvider::embed(Modality modality,
                                                  std::span<const std::uint8_t> content) const {
  nlohmann::json body = {{"modality", modality_name(modality)}, {"content", base64_encode(content)}};
  const nlohmann::json response = post_json(url_, body, timeout_seconds_);
  try {
    const auto dim = response.at("dim").get<std::size_t>();
    auto values = response.at("values").get<std::vector<float>>();
    if (dim != dim_ || values.size() != dim_) {
      throw Error(ErrorCode::kProviderUnavailable,
                  url_ + ": provider returned dim " + std::to_string(values.size()) +
                      ", registered " + std::to_string(dim_));
    }
    return values;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable, url_ + ": malformed response: " + e.what());
  }
}

EmbeddingCache::EmbeddingCache(EmbeddingCache&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  entries_ = std::move(other.entries_);
}

std::optional<EmbeddingVector> EmbeddingCache::lookup(const std::string& content_hash,
                                                      Modality modality) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find({modality, content_hash});
  if (it == entries_.end()) return std::nullopt;
  return it->second.vector;
}

void EmbeddingCache::store(EmbeddingCacheEntry entry) {
  std::unique_lock lock(mutex_);
  auto key = std::make_pair(entry.vector.modality, entry.content_hash);
  entries_.insert_or_assign(std::move(key), std::move(entry));
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void EmbeddingCache::save(const std::string& path) const {
  std::shared_lock lock(mutex_);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write cache " + path);
  for (const auto& [key, entry] : entries_) {
    nlohmann::json line = {
        {"key", entry.content_hash},
        {"modality", modality_name(entry.vector.modality)},
        {"provider_id", entry.vector.provider_id},
        {"created_at", format_timestamp(entry.created_at)},
        {"values", entry.vector.values},
    };
    out << line.dump() << '\n';
  }
}

EmbeddingCache EmbeddingCache::load(const std::string& path) {
  EmbeddingCache cache;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read cache " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EmbeddingCacheEntry entry;
      entry.content_hash = j.at("key").get<std::string>();
      entry.vector.modality = parse_modality(j.at("modality").get<std::string>());
      entry.vector.provider_id = j.at("provider_id").get<std::string>();
      entry.vector.values = j.at("values").get<std::vector<float>>();
      entry.created_at = parse_timestamp(j.at("created_at").get<std::string>());
      cache.store(std::move(entry));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path + ": " + e.what());
    }
  }
  return cache;
}

EmbeddingGateway::EmbeddingGateway(std::shared_ptr<const EmbeddingProvider> provider,
                                   std::shared_ptr<EmbeddingCache> cache)
    : provider_(std::move(provider)), cache_(std::move(cache)) {
  if (!provider_) throw Error(ErrorCode::kInvalidConfig, "embedding gateway needs a provider");
  if (!cache_) cache_ = std::make_shared<EmbeddingCache>();
}

EmbeddingVector EmbeddingGateway::embed_content(Modality modality, std::span<const std::uint8_t> content) {
  const std::string key = to_hex(sha256(content));
  if (auto hit = cache_->lookup(key, modality); hit && hit->provider_id == provider_->id()) {
    return *hit;
  }
  ++provider_calls_;
  std::vector<float> raw = provider_->embed(modality, content);
  if (raw.size() != provider_->dim()) {
    throw Error(ErrorCode::kProviderUnavailable, "provider returned wrong dimension");
  }
  EmbeddingVector v;
  try {
    v.values = normalize(std::span<const float>(raw));
  } catch (const Error&) {
    throw Error(ErrorCode::kProviderUnavailable, "provider returned a zero vector");
  }
  v.modality = modality;
  v.provider_id = provider_->id();
  cache_->store({key, v, now_ms()});
  return v;
}

EmbeddingVector EmbeddingGateway::embed_image(std::span<const std::uint8_t> blob) {
  try {
    decode_metadata(blob);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDecodeFailure, e.what());
  }
  return embed_content(Modality::kImage, blob);
}

EmbeddingVector EmbeddingGateway::embed_image(const PixelBuffer& pixels) {
  Bytes png;
  try {
    png = encode_png(pixels);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDecodeFailure, e.what());
  }
  return embed_content(Modality::kImage, png);
}

EmbeddingVector EmbeddingGateway::embed_text(std::string_view text) {
  if (text.empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  return embed_content(Modality::kText,
                       std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

nlohmann::json to_json(const EmbeddingVector& v) {
  return {{"modality", modality_name(v.modality)}, {"provider_id", v.provider_id}, {"values", v.values}};
}

EmbeddingVector embedding_from_json(const nlohmann::json& j) {
  try {
    EmbeddingVector v;
    v.modality = parse_modality(j.value("modality", std::string("IMAGE")));
    v.provider_id = j.value("provider_id", std::string());
    v.values = j.at("values").get<std::vector<float>>();
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("embedding: ") + e.what());
  }
}

}  // namespace curation

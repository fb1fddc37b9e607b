#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <thread>

#include "curation/embedding.hpp"
#include "curation/error.hpp"
#include "curation/image.hpp"
#include "fixtures.hpp"

using namespace curation;

namespace {

std::shared_ptr<EmbeddingGateway> stub_gateway(std::size_t dim = kStubDimension) {
  return std::make_shared<EmbeddingGateway>(std::make_shared<StubEmbeddingProvider>(dim));
}

class CountingProvider final : public EmbeddingProvider {
 public:
  std::string id() const override { return "counting"; }
  std::size_t dim() const override { return 4; }
  std::vector<float> embed(Modality, std::span<const std::uint8_t> content) const override {
    ++calls;
    return {static_cast<float>(content.size()), 1.0f, 2.0f, 2.0f};
  }
  mutable int calls = 0;
};

class DownProvider final : public EmbeddingProvider {
 public:
  std::string id() const override { return "down"; }
  std::size_t dim() const override { return 8; }
  std::vector<float> embed(Modality, std::span<const std::uint8_t>) const override {
    throw Error(ErrorCode::kProviderUnavailable, "offline");
  }
};

}  // namespace

TEST(Cosine, Examples) {
  const std::vector<float> x = {1, 0}, y = {0, 1}, d = {0.7071f, 0.7071f};
  EXPECT_DOUBLE_EQ(cosine(x, x), 1.0);
  EXPECT_DOUBLE_EQ(cosine(x, y), 0.0);
  EXPECT_NEAR(cosine(x, d), 0.7071, 1e-4);
  const std::vector<float> three = {1, 0, 0};
  EXPECT_THROW(cosine(x, three), Error);
}

TEST(Cosine, SymmetricAndMatchesOracle) {
  auto gw = stub_gateway(64);
  for (int i = 0; i < 50; ++i) {
    const auto a = gw->embed_text("a" + std::to_string(i));
    const auto b = gw->embed_text("b" + std::to_string(i));
    EXPECT_EQ(cosine(a, b), cosine(b, a));
    EXPECT_NEAR(cosine(a, b), fixtures::brute_cosine(a.values, b.values), 1e-6);
  }
}

TEST(Gateway, TextIsDeterministicAndUnitNorm) {
  auto g1 = stub_gateway();
  auto g2 = stub_gateway();
  const auto a = g1->embed_text("red car");
  const auto b = g2->embed_text("red car");
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.dim(), kStubDimension);
  EXPECT_EQ(a.modality, Modality::kText);
  EXPECT_NEAR(l2_norm(a.values), 1.0, kUnitNormTolerance);
  EXPECT_NE(a.values, g1->embed_text("blue car").values);
}

TEST(Gateway, StubVectorIsFrozen) {
  // First components of the stub expansion for "red car", fixed so the
  // vector stays reproducible across processes and releases.
  const auto v = stub_gateway()->embed_text("red car");
  EXPECT_EQ(v.values[0], 0x1.f4588p-8f);
  EXPECT_EQ(v.values[1], -0x1.88b3fcp-7f);
  EXPECT_EQ(v.values[2], 0x1.7516d6p-5f);
  EXPECT_EQ(v.values[3], -0x1.d4124ap-7f);
  EXPECT_EQ(v.values, fixtures::stub_text("red car").values);
  EXPECT_EQ(v.provider_id, "stub-sha256-512");
}

TEST(Gateway, EmptyTextRejected) {
  try {
    stub_gateway()->embed_text("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyText);
  }
}

TEST(Gateway, ImageCacheShortCircuitsProvider) {
  auto provider = std::make_shared<CountingProvider>();
  EmbeddingGateway gw(provider);
  const Bytes blob = encode_png(fixtures::natural_image(20, 20, 1));
  const auto a = gw.embed_image(blob);
  const auto b = gw.embed_image(blob);
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(provider->calls, 1);
  EXPECT_EQ(gw.provider_calls(), 1u);
  EXPECT_NEAR(l2_norm(a.values), 1.0, kUnitNormTolerance);
  // Same bytes as text are a separate cache entry.
  gw.embed_text(std::string_view(reinterpret_cast<const char*>(blob.data()), blob.size()));
  EXPECT_EQ(provider->calls, 2);
}

TEST(Gateway, CorruptBlobIsDecodeFailure) {
  Bytes blob = encode_png(fixtures::natural_image(16, 16, 2));
  blob.resize(20);
  try {
    stub_gateway()->embed_image(blob);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::kDecodeFailure || e.code() == ErrorCode::kCorruptHeader) << e.what();
  }
}

TEST(Gateway, ProviderDownPropagates) {
  EmbeddingGateway gw(std::make_shared<DownProvider>());
  try {
    gw.embed_text("hello");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kProviderUnavailable);
  }
  EXPECT_EQ(gw.cache().size(), 0u);
}

TEST(Gateway, ConcurrentEmbedsAgree) {
  auto gw = stub_gateway(128);
  std::vector<std::vector<float>> out(8);
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] { out[t] = gw->embed_text("shared text").values; });
  }
  for (auto& th : threads) th.join();
  for (const auto& v : out) EXPECT_EQ(v, out[0]);
  EXPECT_EQ(gw->cache().size(), 1u);
}

TEST(Cache, SaveLoadIsBitIdentical) {
  fixtures::TempDir dir;
  auto gw = stub_gateway(32);
  std::vector<EmbeddingVector> originals;
  for (int i = 0; i < 20; ++i) originals.push_back(gw->embed_text("text " + std::to_string(i)));
  originals.push_back(gw->embed_image(encode_png(fixtures::natural_image(12, 12, 5))));
  gw->cache().save(dir.file("cache.jsonl"));

  auto cache = std::make_shared<EmbeddingCache>(EmbeddingCache::load(dir.file("cache.jsonl")));
  EXPECT_EQ(cache->size(), originals.size());
  auto provider = std::make_shared<StubEmbeddingProvider>(32);
  EmbeddingGateway warm(provider, cache);
  for (int i = 0; i < 20; ++i) {
    const auto v = warm.embed_text("text " + std::to_string(i));
    EXPECT_EQ(v.values, originals[i].values);
    for (std::size_t d = 0; d < v.values.size(); ++d) {
      EXPECT_EQ(std::memcmp(&v.values[d], &originals[i].values[d], sizeof(float)), 0);
    }
  }
  EXPECT_EQ(warm.provider_calls(), 0u);
}

TEST(Cache, StoreThenLookup) {
  EmbeddingCache cache;
  EmbeddingCacheEntry e;
  e.content_hash = to_hex(sha256("abc"));
  e.vector = fixtures::unit({3, 4}, Modality::kText);
  cache.store(e);
  const auto hit = cache.lookup(e.content_hash, Modality::kText);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->values, e.vector.values);
  EXPECT_FALSE(cache.lookup(e.content_hash, Modality::kImage));
}

TEST(Normalize, DegenerateThrows) {
  const std::vector<double> zero = {0.0, 0.0, 0.0};
  EXPECT_THROW(normalize(std::span<const double>(zero)), Error);
  const std::vector<double> v = {3.0, 4.0};
  const auto n = normalize(std::span<const double>(v));
  EXPECT_FLOAT_EQ(n[0], 0.6f);
  EXPECT_FLOAT_EQ(n[1], 0.8f);
}

TEST(EmbeddingJson, RoundTrip) {
  const auto v = fixtures::stub_text("json me", 16);
  const auto back = embedding_from_json(to_json(v));
  EXPECT_EQ(back.values, v.values);
  EXPECT_EQ(back.modality, v.modality);
  EXPECT_EQ(back.provider_id, v.provider_id);
}

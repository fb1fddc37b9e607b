#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <functional>
#include <set>
#include <thread>

#include "curation/embedding.hpp"
#include "curation/error.hpp"
#include "curation/vector_index.hpp"
#include "fixtures.hpp"

using namespace curation;

namespace {

std::vector<float> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> raw(dim);
  for (auto& v : raw) v = g(rng);
  return normalize(std::span<const double>(raw));
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kParseError;
}

VectorIndex toy_index() {
  VectorIndex index(2);
  index.insert("a", fixtures::unit({1, 0}));
  index.insert("b", fixtures::unit({0, 1}));
  index.insert("c", fixtures::unit({1, 1}));
  return index;
}

std::vector<std::string> ids_of(const std::vector<ResultEntry>& entries) {
  std::vector<std::string> ids;
  for (const auto& e : entries) ids.push_back(e.record_id);
  return ids;
}

}  // namespace

TEST(VectorIndex, InsertThenFindSelf) {
  VectorIndex index = toy_index();
  const auto r = index.search_exact(fixtures::unit({0, 1}).values, 1);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].record_id, "b");
  EXPECT_NEAR(r[0].similarity, 1.0, 1e-12);
}

TEST(VectorIndex, UpsertReplacesOldVector) {
  VectorIndex index = toy_index();
  index.insert("a", fixtures::unit({-1, 0}));
  EXPECT_EQ(index.size(), 3u);
  const auto r = index.search_exact(fixtures::unit({1, 0}).values, 3);
  EXPECT_NE(r[0].record_id, "a");
  EXPECT_EQ(r.back().record_id, "a");
  EXPECT_NEAR(r.back().similarity, -1.0, 1e-12);
}

TEST(VectorIndex, DimensionMismatch) {
  VectorIndex index(3);
  EXPECT_EQ(code_of([&] { index.insert("x", fixtures::unit({1, 0})); }), ErrorCode::kDimensionMismatch);
  index.insert("y", fixtures::unit({1, 0, 0}));
  const std::vector<float> q = {1, 0};
  EXPECT_EQ(code_of([&] { index.search_exact(q, 1); }), ErrorCode::kDimensionMismatch);
}

TEST(VectorIndex, RejectsNonUnitVector) {
  VectorIndex index(2);
  const std::vector<float> v = {2, 0};
  EXPECT_EQ(code_of([&] { index.insert("x", v); }), ErrorCode::kInvalidQuery);
}

TEST(VectorIndex, KClampedToSize) {
  VectorIndex index = toy_index();
  const auto r = index.search_exact(fixtures::unit({1, 0}).values, 50);
  EXPECT_EQ(ids_of(r), (std::vector<std::string>{"a", "c", "b"}));
  EXPECT_TRUE(std::is_sorted(r.begin(), r.end(), ranks_before));
}

TEST(VectorIndex, TiesBreakByRecordId) {
  VectorIndex index(2);
  index.insert("zeta", fixtures::unit({1, 0}));
  index.insert("alpha", fixtures::unit({0, 1}));
  index.insert("mid", fixtures::unit({1, 0}));
  const auto r = index.search_exact(fixtures::unit({1, 1}).values, 3);
  EXPECT_EQ(ids_of(r), (std::vector<std::string>{"alpha", "mid", "zeta"}));
  const auto s = index.search_exact(fixtures::unit({1, 0}).values, 1);
  EXPECT_EQ(s[0].record_id, "mid");
}

TEST(VectorIndex, EmptyAndUnbuilt) {
  VectorIndex empty(4);
  const std::vector<float> q = {1, 0, 0, 0};
  EXPECT_EQ(code_of([&] { empty.search_exact(q, 1); }), ErrorCode::kEmptyIndex);
  VectorIndex index = toy_index();
  EXPECT_EQ(code_of([&] { index.search_ann(fixtures::unit({1, 0}).values, 1); }), ErrorCode::kIndexNotBuilt);
  index.build();
  EXPECT_NO_THROW(index.search_ann(fixtures::unit({1, 0}).values, 1));
  index.insert("d", fixtures::unit({1, -1}));
  EXPECT_FALSE(index.built());
  EXPECT_EQ(code_of([&] { index.search_ann(fixtures::unit({1, 0}).values, 1); }), ErrorCode::kIndexNotBuilt);
}

TEST(VectorIndex, SingleRecordIndex) {
  VectorIndex index(2);
  index.insert("only", fixtures::unit({0.3, 0.4}));
  index.build();
  const auto r = index.search_ann(fixtures::unit({-1, 0}).values, 10);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].record_id, "only");
}

TEST(VectorIndex, ExclusionSkipsRecords) {
  VectorIndex index = toy_index();
  index.build();
  const ExclusionSet ex = {"a"};
  const auto q = fixtures::unit({1, 0}).values;
  EXPECT_EQ(ids_of(index.search_exact(q, 3, &ex)), (std::vector<std::string>{"c", "b"}));
  EXPECT_EQ(ids_of(index.search_ann(q, 3, &ex)), (std::vector<std::string>{"c", "b"}));
}

TEST(VectorIndex, ExactIsGloballyOptimal) {
  std::mt19937_64 rng(3);
  VectorIndex index(24);
  std::vector<std::vector<float>> all;
  for (int i = 0; i < 400; ++i) {
    all.push_back(random_unit(24, rng));
    index.insert("r" + std::to_string(i), all.back());
  }
  for (int t = 0; t < 20; ++t) {
    const auto q = random_unit(24, rng);
    const auto r = index.search_exact(q, 10);
    ASSERT_EQ(r.size(), 10u);
    const auto returned = ids_of(r);
    const std::set<std::string> got(returned.begin(), returned.end());
    for (int i = 0; i < 400; ++i) {
      const std::string id = "r" + std::to_string(i);
      if (!got.count(id)) EXPECT_LE(fixtures::brute_cosine(all[i], q), r.back().similarity + 1e-9);
    }
  }
}

TEST(VectorIndex, AnnRecallOnSmallCorpus) {
  std::mt19937_64 rng(8);
  VectorIndex index(32);
  for (int i = 0; i < 2000; ++i) index.insert("r" + std::to_string(i), random_unit(32, rng));
  index.build();
  double hits = 0;
  const int queries = 50;
  for (int t = 0; t < queries; ++t) {
    const auto q = random_unit(32, rng);
    const auto exact = ids_of(index.search_exact(q, 10));
    const auto approx = ids_of(index.search_ann(q, 10));
    const std::set<std::string> truth(exact.begin(), exact.end());
    for (const auto& id : approx) hits += truth.count(id);
  }
  EXPECT_GE(hits / (queries * 10.0), 0.95);
}

TEST(VectorIndex, BuildIsDeterministic) {
  auto make = [] {
    std::mt19937_64 rng(12);
    VectorIndex index(16);
    for (int i = 0; i < 500; ++i) index.insert("r" + std::to_string(i), random_unit(16, rng));
    index.build();
    return index;
  };
  VectorIndex a = make(), b = make();
  std::mt19937_64 rng(99);
  for (int t = 0; t < 20; ++t) {
    const auto q = random_unit(16, rng);
    EXPECT_EQ(a.search_ann(q, 10), b.search_ann(q, 10));
  }
}

TEST(VectorIndex, SaveLoadRoundTrip) {
  fixtures::TempDir dir;
  std::mt19937_64 rng(21);
  VectorIndex index(8);
  for (int i = 0; i < 300; ++i) index.insert("id-" + std::to_string(i), random_unit(8, rng));
  index.build();
  index.save(dir.file("idx.json"), dir.file("idx.bin"));
  const auto header = nlohmann::json::parse(read_file(dir.file("idx.json")));
  EXPECT_EQ(header.at("dimension"), 8);
  EXPECT_EQ(header.at("count"), 300);
  EXPECT_EQ(header.at("metric"), "cosine");
  EXPECT_EQ(read_file(dir.file("idx.bin")).at(0), 1);

  VectorIndex back = VectorIndex::load(dir.file("idx.json"), dir.file("idx.bin"));
  EXPECT_EQ(back.size(), 300u);
  EXPECT_TRUE(back.built());
  EXPECT_EQ(back.vector_of("id-17"), index.vector_of("id-17"));
  for (int t = 0; t < 10; ++t) {
    const auto q = random_unit(8, rng);
    EXPECT_EQ(back.search_ann(q, 7), index.search_ann(q, 7));
    EXPECT_EQ(back.search_exact(q, 7), index.search_exact(q, 7));
  }
}

TEST(VectorIndex, RadiusSearch) {
  VectorIndex index = toy_index();
  const auto r = index.search_radius(fixtures::unit({1, 0}).values, 0.5);
  EXPECT_EQ(ids_of(r), (std::vector<std::string>{"a", "c"}));
}

TEST(VectorIndex, ConcurrentSearchesAgree) {
  std::mt19937_64 rng(44);
  VectorIndex index(16);
  for (int i = 0; i < 300; ++i) index.insert("r" + std::to_string(i), random_unit(16, rng));
  index.build();
  const auto q = random_unit(16, rng);
  const auto want = index.search_ann(q, 10);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 6; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < 20; ++i) {
        if (index.search_ann(q, 10) != want) ++mismatches;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}

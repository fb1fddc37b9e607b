#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "curation/captions.hpp"
#include "curation/cli.hpp"
#include "curation/error.hpp"
#include "curation/pipeline.hpp"
#include "curation/service.hpp"
#include "curation/util.hpp"
#include "fixtures.hpp"

using namespace curation;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "curation");
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::map<Task, std::size_t> task_split(const Manifest& m) {
  std::map<Task, std::size_t> out;
  for (const auto& e : m.entries) ++out[e.task];
  return out;
}

std::vector<std::string> ids_of(const nlohmann::json& entries) {
  std::vector<std::string> out;
  for (const auto& e : entries) out.push_back(e.at("record_id").get<std::string>());
  return out;
}

// A 40-record image corpus with its manifest and a config file, shared by the suite.
class CliCorpus : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fixtures::TempDir();
    const Manifest m = fixtures::mixed_corpus(dir_->path(), 40, 123);
    m.save(dir_->file("m.jsonl"));
    const nlohmann::json config = {{"corpus_root", "."},
                                   {"index_path", "idx"},
                                   {"cache_path", "cache.jsonl"},
                                   {"seed", 9}};
    write_text(dir_->file("config.json"), config.dump());
  }
  static void TearDownTestSuite() { delete dir_; }

  static void write_text(const std::string& path, const std::string& text) {
    write_file(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  }
  static std::string path(const std::string& name) { return dir_->file(name); }
  static std::string config() { return path("config.json"); }

  static fixtures::TempDir* dir_;
};
fixtures::TempDir* CliCorpus::dir_ = nullptr;

}  // namespace

TEST(CliConfig, ParsesAndValidates) {
  const CliConfig c = config_from_json({{"seed", 5},
                                        {"dedup", {{"threshold", 0.9}, {"policy", "DROP_ALL_DUPES"}}},
                                        {"providers", {{"embedding_dim", 64}}},
                                        {"service", {{"port", 9000}}}});
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.sampling.seed, 5u);
  EXPECT_DOUBLE_EQ(c.dedup_threshold, 0.9);
  EXPECT_EQ(c.dedup_policy, DedupPolicy::kDropAllDupes);
  EXPECT_EQ(c.providers.embedding_dim, 64u);
  EXPECT_EQ(c.port, 9000);
  EXPECT_THROW(config_from_json({{"dedup", {{"threshold", 2.0}}}}), Error);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), Error);
  EXPECT_THROW(load_config("/nonexistent/config.json"), Error);
}

TEST(CliConfig, MissingCorpusRootFailsFast) {
  fixtures::TempDir dir;
  const std::string text = nlohmann::json{{"corpus_root", "no-such-dir"}}.dump();
  write_file(dir.file("c.json"), std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  try {
    load_config(dir.file("c.json"));
    FAIL() << "expected InvalidConfig";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidConfig);
  }
  const CliRun r = cli({"plan", "--config", dir.file("c.json"), "--manifest", dir.file("m.jsonl")});
  EXPECT_EQ(r.code, 1);
}

TEST(CliExitCodes, UsageErrorsReturnTwo) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"bogus"}).code, 2);
  EXPECT_EQ(cli({"score", "--no-such-flag"}).code, 2);
  EXPECT_EQ(cli({"score"}).code, 2);
  EXPECT_EQ(cli({"sample", "--manifest", "x"}).code, 2);
  EXPECT_EQ(cli({"search", "--index", "/nonexistent/idx", "--mode", "sideways"}).code, 1);
  const CliRun help = cli({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("index-build"), std::string::npos);
}

TEST(CliExitCodes, OperationalErrorsReturnOne) {
  const CliRun r = cli({"score", "--manifest", "/nonexistent/m.jsonl"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST_F(CliCorpus, ScoreMatchesLibrary) {
  const CliRun r = cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "PT"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Manifest m = Manifest::load(path("m.jsonl"));
  FilterOptions opts;
  opts.seed = 9;
  const FilterResult direct = run_filter_pass(m, default_profile_set().pt, stub_providers(),
                                              file_resolver(dir_->path().string()), opts);
  EXPECT_EQ(nlohmann::json::parse(r.out), to_json(direct.report));
  EXPECT_EQ(cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "PT", "--threads", "3"}).out,
            r.out);
}

TEST_F(CliCorpus, ScoreStageFlagValidation) {
  EXPECT_EQ(cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "xx"}).code, 2);
  write_text(path("ct.json"), to_json(default_profile_set().ct).dump());
  EXPECT_EQ(cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "sft", "--threshold-profile",
                 path("ct.json")})
                .code,
            2);
  const CliRun ok = cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--threshold-profile", path("ct.json")});
  ASSERT_EQ(ok.code, 0) << ok.err;
  EXPECT_EQ(nlohmann::json::parse(ok.out).at("profile").at("stage"), "CT");
}

TEST_F(CliCorpus, ProfileExportRoundTrip) {
  ProfileSet set = default_profile_set();
  set.sft.min_bpp = 3.5;
  write_text(path("set.json"), to_json(set).dump());
  const LoadedProfiles loaded = load_threshold_profile(path("set.json"));
  ASSERT_TRUE(loaded.set);
  EXPECT_EQ(loaded.set->sft, set.sft);
  const CliRun r = cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "sft",
                     "--threshold-profile", path("set.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(profile_from_json(nlohmann::json::parse(r.out).at("profile")), set.sft);

  set.sft.min_bpp = 0.5;
  write_text(path("bad.json"), to_json(set).dump());
  EXPECT_EQ(cli({"score", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "sft",
                 "--threshold-profile", path("bad.json")})
                .code,
            1);
}

TEST_F(CliCorpus, FilterWritesSubsetAndReport) {
  const CliRun r = cli({"filter", "--config", config(), "--manifest", path("m.jsonl"), "--stage", "ct", "--out",
                     path("f.jsonl"), "--report", path("f.report.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Manifest out = Manifest::load(path("f.jsonl"));
  const auto report = nlohmann::json::parse(read_file(path("f.report.json")));
  EXPECT_EQ(out.size(), report.at("passed").get<std::size_t>());
  for (const auto& e : out.entries) EXPECT_EQ(e.decision, RecordDecision::kPass);
}

TEST_F(CliCorpus, DedupRemovesPlantedCopy) {
  Manifest m = Manifest::load(path("m.jsonl"));
  ManifestEntry twin = m.entries[4];
  twin.record_id = "zz-twin";
  m.entries.push_back(twin);
  m.save(path("twin.jsonl"));
  const CliRun r = cli({"dedup", "--config", config(), "--manifest", path("twin.jsonl"), "--out", path("d.jsonl"),
                     "--groups", path("groups.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Manifest d = Manifest::load(path("d.jsonl"));
  EXPECT_EQ(d.size(), 40u);
  bool twin_kept = false;
  for (const auto& e : d.entries) twin_kept |= e.record_id == "zz-twin";
  EXPECT_FALSE(twin_kept);
  EXPECT_EQ(cli({"dedup", "--config", config(), "--manifest", path("twin.jsonl"), "--policy", "NOPE"}).code, 2);
}

TEST_F(CliCorpus, SampleHitsStageMixture) {
  const Manifest big = fixtures::synthetic_manifest(60);
  big.save(path("big.jsonl"));
  const CliRun r = cli({"sample", "--config", config(), "--manifest", path("big.jsonl"), "--stage", "CT", "--n", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Manifest s = Manifest::parse(r.out);
  EXPECT_EQ(s.size(), 100u);
  const auto split = task_split(s);
  EXPECT_EQ(split.at(Task::kT2I), 70u);
  EXPECT_EQ(split.at(Task::kI2I), 20u);
  EXPECT_EQ(split.at(Task::kT2S), 5u);
  EXPECT_EQ(split.at(Task::kTI2S), 5u);
  EXPECT_EQ(cli({"sample", "--config", config(), "--manifest", path("big.jsonl"), "--stage", "CT", "--n", "100"}).out,
            r.out);
  const CliRun other = cli({"sample", "--config", config(), "--manifest", path("big.jsonl"), "--stage", "CT", "--n", "100",
                         "--seed", "10"});
  EXPECT_NE(other.out, r.out);
  const CliRun plan = cli({"plan", "--config", config(), "--manifest", path("big.jsonl"), "--stage", "ct"});
  ASSERT_EQ(plan.code, 0);
  EXPECT_DOUBLE_EQ(nlohmann::json::parse(plan.out).at("task_ratios").at("T2I").get<double>(), 0.7);
}

TEST_F(CliCorpus, StrictSampleShortfallFails) {
  const Manifest small = fixtures::synthetic_manifest(1);
  small.save(path("small.jsonl"));
  const CliRun lenient = cli({"sample", "--manifest", path("small.jsonl"), "--stage", "CT", "--n", "100"});
  EXPECT_EQ(lenient.code, 0);
  EXPECT_NE(lenient.err.find("shortfall"), std::string::npos);
  EXPECT_EQ(cli({"sample", "--manifest", path("small.jsonl"), "--stage", "CT", "--n", "100", "--strict"}).code, 1);
}

TEST_F(CliCorpus, SearchMatchesService) {
  const CliRun built = cli({"index-build", "--config", config(), "--manifest", path("m.jsonl")});
  ASSERT_EQ(built.code, 0) << built.err;
  const Manifest m = Manifest::load(path("m.jsonl"));
  const std::string a = path(m.entries[1].blob_ref), b = path(m.entries[7].blob_ref);

  const CliRun r = cli({"search", "--config", config(), "--mode", "multi", "--seeds", a + "," + b, "-k", "10"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cli_json = nlohmann::json::parse(r.out);

  auto index = std::make_shared<VectorIndex>(VectorIndex::load(path("idx.json"), path("idx.bin")));
  auto gateway = std::make_shared<EmbeddingGateway>(std::make_shared<StubEmbeddingProvider>());
  ServiceConfig sc;
  sc.corpus_root = dir_->path().string();
  ServiceCore core(index, gateway, m, sc);
  const HttpResponse resp = core.post_search(
      {{"mode", "MULTI_IMAGE"},
       {"k", 10},
       {"seeds", {{{"image_b64", base64_encode(read_file(a))}}, {{"image_b64", base64_encode(read_file(b))}}}}});
  ASSERT_EQ(resp.status, 200) << resp.body.dump();
  EXPECT_EQ(ids_of(cli_json.at("entries")), ids_of(resp.body.at("entries")));
  EXPECT_EQ(cli_json.at("entries"), resp.body.at("entries"));
  EXPECT_EQ(ids_of(cli_json.at("entries")).size(), 10u);

  const CliRun by_id = cli({"search", "--config", config(), "--seeds", m.entries[1].record_id, "-k", "3", "--exact"});
  ASSERT_EQ(by_id.code, 0) << by_id.err;
  EXPECT_EQ(ids_of(nlohmann::json::parse(by_id.out).at("entries")).front(), m.entries[1].record_id);

  EXPECT_EQ(cli({"search", "--config", config(), "--mode", "multi", "--seeds", a, "-k", "10"}).code, 2);
  EXPECT_EQ(cli({"search", "--config", config(), "--seeds", "not-a-record", "-k", "10"}).code, 2);
  const CliRun text = cli({"search", "--config", config(), "--mode", "text", "--text", "red car", "-k", "5"});
  EXPECT_EQ(text.code, 0) << text.err;
}

TEST_F(CliCorpus, ConfigFromEnvironment) {
  ::setenv("CURATION_CONFIG", config().c_str(), 1);
  const CliRun r = cli({"plan", "--manifest", path("m.jsonl")});
  ::unsetenv("CURATION_CONFIG");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out).at("seed"), 9);
}

TEST_F(CliCorpus, IngestScansDirectory) {
  fixtures::TempDir images;
  write_file(images.file("a.png"), fixtures::encode(fixtures::Kind::kNatural, 20, 20, 1));
  std::filesystem::create_directories(images.path() / "sub");
  write_file(images.file("sub/b.jpg"), fixtures::encode(fixtures::Kind::kJpeg, 20, 20, 2));
  write_text(images.file("broken.png"), "not an image");
  write_text(images.file("notes.txt"), "ignored");
  const CliRun r = cli({"ingest", "--input", images.path().string(), "--task", "I2I", "--category", "CHART"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Manifest m = Manifest::parse(r.out);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.entries[0].record_id, "a.png");
  EXPECT_EQ(m.entries[1].blob_ref, "sub/b.jpg");
  EXPECT_EQ(m.entries[1].task, Task::kI2I);
  EXPECT_NE(r.err.find("skipped 1"), std::string::npos);
  EXPECT_EQ(cli({"ingest", "--input", images.path().string(), "--task", "NOPE"}).code, 2);
}

TEST_F(CliCorpus, ExportStampsCaptionVersions) {
  const Manifest m = Manifest::load(path("m.jsonl"));
  CaptionStore store;
  StructuredCaption c = fixtures::full_caption(m.entries[2].record_id, PrimaryCategory::kPhotorealistic);
  store.create(c);
  CaptionPatch patch;
  patch.set["lighting"] = "soft window light";
  store.merge(c.record_id, store.get(c.record_id)->version, patch, 1700000000001);
  store.save(path("captions.jsonl"));

  const CliRun r = cli({"export", "--manifest", path("m.jsonl"), "--captions", path("captions.jsonl"), "--out",
                     path("export.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const Manifest out = Manifest::load(path("export.jsonl"));
  ASSERT_EQ(out.size(), m.size());
  EXPECT_EQ(out.entries[2].caption_version, store.get(c.record_id)->version);
  EXPECT_EQ(out.entries[3].caption_version, 0);
  EXPECT_EQ(out.metadata.at("exported"), true);
  EXPECT_EQ(cli({"export", "--manifest", path("m.jsonl")}).code, 2);

  const CliRun filtered = cli({"filter", "--config", config(), "--manifest", path("m.jsonl"), "--out", path("p.jsonl")});
  ASSERT_EQ(filtered.code, 0);
  ASSERT_EQ(cli({"export", "--manifest", path("p.jsonl"), "--passed-only", "--out", path("p.export.jsonl")}).code, 0);
  EXPECT_EQ(Manifest::load(path("p.export.jsonl")).size(), Manifest::load(path("p.jsonl")).size());
  ASSERT_EQ(cli({"export", "--manifest", path("m.jsonl"), "--passed-only", "--out", path("none.jsonl")}).code, 0);
  EXPECT_EQ(Manifest::load(path("none.jsonl")).size(), 0u);
}

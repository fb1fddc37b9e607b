#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curation/dedup.hpp"
#include "curation/embedding.hpp"
#include "curation/profiles.hpp"
#include "curation/quality.hpp"
#include "curation/sampling.hpp"
#include "json.hpp"

namespace curation {

struct ProviderEndpoints {
  std::string embedding_url;  // empty: deterministic stub
  std::size_t embedding_dim = kStubDimension;
  std::string ai_url;         // empty: stub scorer
  std::string watermark_url;
  std::string greasy_url;
  std::string rewrite_url;
};

struct CliConfig {
  std::string corpus_root;
  std::string index_path;  // writes <index_path>.json and <index_path>.bin
  std::string cache_path;  // embedding cache, JSON lines
  ProviderEndpoints providers;
  ProfileSet profiles = default_profile_set();
  SamplingConfig sampling;
  double dedup_threshold = kDefaultDedupThreshold;
  DedupPolicy dedup_policy = DedupPolicy::kKeepRepresentative;
  std::uint64_t seed = 0;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string annotation_log;
};

// Parses and validates a config document. Throws InvalidConfig.
CliConfig config_from_json(const nlohmann::json& j);
// Relative paths resolve against the config file's directory and a present
// corpus_root must be an existing directory. Throws InvalidConfig.
CliConfig load_config(const std::string& path);

ScorerProviderSet make_scorers(const ProviderEndpoints& endpoints);
std::shared_ptr<const EmbeddingProvider> make_embedder(const ProviderEndpoints& endpoints);

// Accepts either one profile object (with "stage") or a full stage set.
struct LoadedProfiles {
  std::optional<ThresholdProfile> single;
  std::optional<ProfileSet> set;
};
LoadedProfiles load_threshold_profile(const std::string& path);

// Runs one command. Exit code 0 on success, 1 on operational error, 2 on
// usage error. argv[0] is the program name.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace curation

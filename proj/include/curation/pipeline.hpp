#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "curation/dedup.hpp"
#include "curation/embedding.hpp"
#include "curation/manifest.hpp"
#include "curation/profiles.hpp"
#include "curation/quality.hpp"
#include "curation/sampling.hpp"
#include "json.hpp"

namespace curation {

// Loads the encoded bytes behind a manifest entry.
using BlobResolver = std::function<Bytes(const ManifestEntry&)>;

// Resolves blob_ref against a corpus root; absolute refs are used as-is.
BlobResolver file_resolver(std::string corpus_root);

struct Histogram {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::size_t> counts;

  // Equal-width bins over [lo, hi]; the top edge falls in the last bin.
  static Histogram of(const std::vector<double>& values, std::size_t bins);
};

nlohmann::json to_json(const Histogram& h);

struct RecordFailure {
  std::string record_id;
  std::string message;
};

struct PassReport {
  ThresholdProfile profile;
  std::size_t total = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t errored = 0;
  std::map<std::string, std::size_t> violation_counts;  // per operator
  std::map<std::string, Histogram> score_histograms;    // per operator, over scored records
  std::vector<std::string> inspection_sample;           // passed ids drawn for manual review
  std::vector<QualityReport> reports;                   // manifest order, scored records only
  std::vector<RecordFailure> failures;
};

nlohmann::json to_json(const PassReport& report);

struct FilterOptions {
  ScoringOptions scoring;
  std::size_t threads = 0;  // 0: hardware concurrency
  std::size_t inspection_sample = 20;
  std::size_t histogram_bins = 20;
  std::uint64_t seed = 0;
};

struct FilterResult {
  Manifest filtered;
  PassReport report;
};

// Scores every entry in parallel, drops FAILs and records that cannot be
// loaded or decoded, and keeps survivors in source order with decision PASS.
FilterResult run_filter_pass(const Manifest& source, const ThresholdProfile& profile,
                             const ScorerProviderSet& providers, const BlobResolver& resolve,
                             const FilterOptions& options = {});

struct PipelineConfig {
  Stage stage = Stage::kPT;
  ProfileSet profiles = default_profile_set();
  double dedup_threshold = kDefaultDedupThreshold;
  DedupPolicy dedup_policy = DedupPolicy::kKeepRepresentative;
  SamplingConfig sampling;
  std::optional<std::size_t> sample_size;  // unset: keep every survivor
  FilterOptions filter;
};

struct PipelineResult {
  std::vector<DuplicateGroup> groups;
  Manifest deduplicated;
  FilterResult filter;
  std::optional<SamplingPlan> plan;
  std::optional<SampleResult> sample;
  const Manifest& output() const { return sample ? sample->manifest : filter.filtered; }
};

// dedup -> score -> threshold -> sample.
PipelineResult run_pipeline(const Manifest& source, const PipelineConfig& config, const ScorerProviderSet& providers,
                            const BlobResolver& resolve, EmbeddingGateway& gateway);

}  // namespace curation

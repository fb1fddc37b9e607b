#include "curation/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

#include "curation/error.hpp"
#include "curation/util.hpp"

namespace curation {

BlobResolver file_resolver(std::string corpus_root) {
  return [root = std::move(corpus_root)](const ManifestEntry& entry) {
    std::filesystem::path ref(entry.blob_ref);
    if (entry.blob_ref.empty()) throw Error(ErrorCode::kIoError, "record '" + entry.record_id + "' has no blob_ref");
    if (ref.is_relative() && !root.empty()) ref = std::filesystem::path(root) / ref;
    return read_file(ref.string());
  };
}

Histogram Histogram::of(const std::vector<double>& values, std::size_t bins) {
  Histogram h;
  h.counts.assign(std::max<std::size_t>(bins, 1), 0);
  if (values.empty()) return h;
  h.lo = *std::min_element(values.begin(), values.end());
  h.hi = *std::max_element(values.begin(), values.end());
  if (h.hi <= h.lo) h.hi = h.lo + 1.0;
  const double width = (h.hi - h.lo) / static_cast<double>(h.counts.size());
  for (double v : values) {
    auto bin = static_cast<std::size_t>(std::floor((v - h.lo) / width));
    h.counts[std::min(bin, h.counts.size() - 1)]++;
  }
  return h;
}

nlohmann::json to_json(const Histogram& h) { return {{"lo", h.lo}, {"hi", h.hi}, {"counts", h.counts}}; }

nlohmann::json to_json(const PassReport& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [name, h] : r.score_histograms) hist[name] = to_json(h);
  nlohmann::json reports = nlohmann::json::array();
  for (const auto& q : r.reports) reports.push_back(to_json(q));
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : r.failures) failures.push_back({{"record_id", f.record_id}, {"message", f.message}});
  return {{"profile", to_json(r.profile)},
          {"total", r.total},
          {"passed", r.passed},
          {"failed", r.failed},
          {"errored", r.errored},
          {"violation_counts", r.violation_counts},
          {"score_histograms", hist},
          {"inspection_sample", r.inspection_sample},
          {"reports", reports},
          {"failures", failures}};
}

namespace {

struct Slot {
  std::optional<QualityReport> report;
  std::optional<std::string> failure;
};

}  // namespace

FilterResult run_filter_pass(const Manifest& source, const ThresholdProfile& profile,
                             const ScorerProviderSet& providers, const BlobResolver& resolve,
                             const FilterOptions& options) {
  const std::size_t n = source.entries.size();
  std::vector<Slot> slots(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const ManifestEntry& e = source.entries[i];
      try {
        ImageRecord record{e.record_id, e.blob_ref, resolve(e), {}};
        slots[i].report = score_image(record, providers, profile, options.scoring);
      } catch (const std::exception& ex) {
        slots[i].failure = ex.what();
      }
    }
  };
  std::size_t threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n, 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  FilterResult result;
  PassReport& report = result.report;
  report.profile = profile;
  report.total = n;
  for (const char* name : kOperatorNames) report.violation_counts[name] = 0;
  std::map<std::string, std::vector<double>> values;
  std::vector<std::string> passed_ids;
  result.filtered.metadata = source.metadata;
  result.filtered.metadata["filter_profile"] = to_json(profile);

  for (std::size_t i = 0; i < n; ++i) {
    const ManifestEntry& e = source.entries[i];
    if (slots[i].failure) {
      ++report.errored;
      report.failures.push_back({e.record_id, *slots[i].failure});
      continue;
    }
    const QualityReport& q = *slots[i].report;
    values["compression_ratio"].push_back(q.compression_ratio);
    values["edge_variance"].push_back(q.edge_variance);
    values["bpp"].push_back(q.bpp);
    if (q.ai_score) values["ai_score"].push_back(*q.ai_score);
    if (q.watermark_score) values["watermark_score"].push_back(*q.watermark_score);
    if (q.greasy_score) values["greasy_score"].push_back(*q.greasy_score);
    for (const auto& v : q.violations) ++report.violation_counts[v];
    if (q.passed()) {
      ++report.passed;
      passed_ids.push_back(e.record_id);
      ManifestEntry kept = e;
      kept.decision = RecordDecision::kPass;
      result.filtered.entries.push_back(std::move(kept));
    } else {
      ++report.failed;
    }
    report.reports.push_back(q);
  }
  for (const char* name : kOperatorNames) {
    report.score_histograms[name] = Histogram::of(values[name], options.histogram_bins);
  }

  Rng rng(options.seed);
  rng.shuffle(passed_ids);
  passed_ids.resize(std::min(passed_ids.size(), options.inspection_sample));
  report.inspection_sample = std::move(passed_ids);
  return result;
}

PipelineResult run_pipeline(const Manifest& source, const PipelineConfig& config, const ScorerProviderSet& providers,
                            const BlobResolver& resolve, EmbeddingGateway& gateway) {
  validate_profiles(config.profiles);
  PipelineResult result;

  std::map<std::string, EmbeddingVector> vectors;
  for (const auto& e : source.entries) {
    try {
      vectors.emplace(e.record_id, gateway.embed_image(resolve(e)));
    } catch (const Error&) {
      // left for the filter pass to report
    }
  }
  result.groups = find_near_duplicates(vectors, config.dedup_threshold);
  result.deduplicated = dedup_manifest(source, result.groups, config.dedup_policy);
  result.deduplicated.metadata["dedup"] = {{"threshold", config.dedup_threshold},
                                           {"policy", policy_name(config.dedup_policy)},
                                           {"groups", result.groups.size()}};

  const ThresholdProfile profile = build_threshold_profile(config.stage, config.profiles);
  result.filter = run_filter_pass(result.deduplicated, profile, providers, resolve, config.filter);

  if (config.sample_size) {
    result.plan = build_sampling_plan(config.stage, category_counts(result.filter.filtered), config.sampling);
    result.sample = sample_manifest(*result.plan, result.filter.filtered, *config.sample_size);
  }
  return result;
}

}  // namespace curation

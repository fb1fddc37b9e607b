#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "curation/image.hpp"
#include "curation/profiles.hpp"
#include "json.hpp"

namespace curation {

// A plugin scorer maps a record to a probability in [0, 1]. Implementations
// throw Error(ProviderUnavailable) when they cannot answer.
class ScorerProvider {
 public:
  virtual ~ScorerProvider() = default;
  virtual std::string id() const = 0;
  virtual double score(const ImageRecord& record) const = 0;
};

// Deterministic stand-in: SHA-256 of (salt || blob) mapped to [0, 1].
class StubScorer final : public ScorerProvider {
 public:
  explicit StubScorer(std::string salt) : salt_(std::move(salt)) {}
  std::string id() const override { return "stub:" + salt_; }
  double score(const ImageRecord& record) const override;

 private:
  std::string salt_;
};

// Calls a remote scoring service: POST {record_id, content: base64} and
// expects {"score": p}.
class RemoteScorer final : public ScorerProvider {
 public:
  RemoteScorer(std::string name, std::string url, int timeout_seconds = 10)
      : name_(std::move(name)), url_(std::move(url)), timeout_seconds_(timeout_seconds) {}
  std::string id() const override { return "remote:" + name_; }
  double score(const ImageRecord& record) const override;

 private:
  std::string name_;
  std::string url_;
  int timeout_seconds_;
};

// Always throws ProviderUnavailable; stands in for an endpoint that is down.
class UnavailableScorer final : public ScorerProvider {
 public:
  std::string id() const override { return "unavailable"; }
  double score(const ImageRecord&) const override;
};

struct ScorerProviderSet {
  std::shared_ptr<const ScorerProvider> ai;
  std::shared_ptr<const ScorerProvider> watermark;
  std::shared_ptr<const ScorerProvider> greasy;
};

ScorerProviderSet stub_providers();

enum class Decision { kPass, kFail };

struct QualityReport {
  std::string record_id;
  double compression_ratio = 0.0;
  double edge_variance = 0.0;
  double bpp = 0.0;
  std::optional<double> ai_score;
  std::optional<double> watermark_score;
  std::optional<double> greasy_score;
  Decision decision = Decision::kPass;
  std::vector<std::string> violations;
  // Providers that were configured but failed; not serialized.
  std::vector<std::string> unavailable;

  bool passed() const { return decision == Decision::kPass; }
};

// Operator names, in the order violations are listed.
inline constexpr const char* kOperatorNames[] = {
    "compression_ratio", "edge_variance", "bpp", "ai_score", "watermark_score", "greasy_score"};

struct ScoringOptions {
  std::optional<std::uint32_t> band_width;  // default_band_width when absent
  int jpeg_quality = 75;
};

// Re-applies a profile to already-computed scores. Absent plugin scores are
// skipped.
void apply_profile(QualityReport& report, const ThresholdProfile& profile);

// Throws DecodeFailure when the blob cannot be decoded. Provider failures are
// not errors: the score is left absent and the provider id is recorded.
QualityReport score_image(const ImageRecord& record, const ScorerProviderSet& providers,
                          const ThresholdProfile& profile, const ScoringOptions& options = {});

nlohmann::json to_json(const QualityReport& report);
QualityReport quality_report_from_json(const nlohmann::json& j);

}  // namespace curation

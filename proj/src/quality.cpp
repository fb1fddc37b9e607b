#include "curation/quality.hpp"

#include <algorithm>
#include <cmath>

#include "curation/error.hpp"
#include "curation/metrics.hpp"
#include "curation/remote.hpp"

namespace curation {

namespace {

double digest_to_unit(const Digest& d) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x = (x << 8) | d[static_cast<std::size_t>(i)];
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Every pixel of a one-pixel-wide image is a border pixel.
double whole_image_luma_variance(const PixelBuffer& pixels) {
  const PixelBuffer px = to_8bit(pixels);
  double sum = 0.0;
  const std::size_t n = static_cast<std::size_t>(px.width()) * px.height();
  for (std::uint32_t y = 0; y < px.height(); ++y)
    for (std::uint32_t x = 0; x < px.width(); ++x) sum += luma(px, x, y);
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::uint32_t y = 0; y < px.height(); ++y)
    for (std::uint32_t x = 0; x < px.width(); ++x) {
      const double d = luma(px, x, y) - mean;
      sq += d * d;
    }
  return sq / static_cast<double>(n);
}

std::optional<double> run_plugin(const std::shared_ptr<const ScorerProvider>& provider,
                                 const ImageRecord& record, std::vector<std::string>& unavailable) {
  if (!provider) return std::nullopt;
  try {
    const double p = provider->score(record);
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::kProviderUnavailable, provider->id() + " returned out-of-range score");
    }
    return p;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kProviderUnavailable) throw;
    unavailable.push_back(provider->id());
    return std::nullopt;
  }
}

}  // namespace

double StubScorer::score(const ImageRecord& record) const {
  Bytes salted(salt_.begin(), salt_.end());
  salted.push_back(0);
  salted.insert(salted.end(), record.blob.begin(), record.blob.end());
  return digest_to_unit(sha256(salted));
}

double RemoteScorer::score(const ImageRecord& record) const {
  nlohmann::json body = {{"record_id", record.record_id}, {"content", base64_encode(record.blob)}};
  const nlohmann::json response = post_json(url_, body, timeout_seconds_);
  if (!response.contains("score") || !response["score"].is_number()) {
    throw Error(ErrorCode::kProviderUnavailable, url_ + ": response lacks numeric 'score'");
  }
  return response["score"].get<double>();
}

double UnavailableScorer::score(const ImageRecord&) const {
  throw Error(ErrorCode::kProviderUnavailable, "scorer endpoint down");
}

ScorerProviderSet stub_providers() {
  return {std::make_shared<StubScorer>("ai"), std::make_shared<StubScorer>("watermark"),
          std::make_shared<StubScorer>("greasy")};
}

void apply_profile(QualityReport& report, const ThresholdProfile& profile) {
  report.violations.clear();
  if (report.compression_ratio < profile.min_compression_ratio) report.violations.emplace_back("compression_ratio");
  if (report.edge_variance < profile.min_edge_variance) report.violations.emplace_back("edge_variance");
  if (report.bpp < profile.min_bpp) report.violations.emplace_back("bpp");
  if (report.ai_score && *report.ai_score < profile.min_ai_score) report.violations.emplace_back("ai_score");
  if (report.watermark_score && *report.watermark_score > profile.max_watermark_score)
    report.violations.emplace_back("watermark_score");
  if (report.greasy_score && *report.greasy_score > profile.max_greasy_score)
    report.violations.emplace_back("greasy_score");
  report.decision = report.violations.empty() ? Decision::kPass : Decision::kFail;
}

QualityReport score_image(const ImageRecord& record, const ScorerProviderSet& providers,
                          const ThresholdProfile& profile, const ScoringOptions& options) {
  PixelBuffer pixels;
  try {
    pixels = decode_pixels(record.blob);
  } catch (const Error& e) {
    throw Error(ErrorCode::kDecodeFailure, record.record_id + ": " + e.what());
  }

  QualityReport report;
  report.record_id = record.record_id;
  report.compression_ratio = compression_ratio(pixels.meta);
  if (std::min(pixels.width(), pixels.height()) < 2) {
    report.edge_variance = whole_image_luma_variance(pixels);
  } else {
    const std::uint32_t band =
        options.band_width.value_or(default_band_width(pixels.width(), pixels.height()));
    report.edge_variance = edge_pixel_variance(pixels, band);
  }
  report.bpp = bpp_complexity(pixels, options.jpeg_quality);
  report.ai_score = run_plugin(providers.ai, record, report.unavailable);
  report.watermark_score = run_plugin(providers.watermark, record, report.unavailable);
  report.greasy_score = run_plugin(providers.greasy, record, report.unavailable);
  apply_profile(report, profile);
  return report;
}

nlohmann::json to_json(const QualityReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return nlohmann::json{
      {"record_id", r.record_id},
      {"compression_ratio", r.compression_ratio},
      {"edge_variance", r.edge_variance},
      {"bpp", r.bpp},
      {"ai_score", opt(r.ai_score)},
      {"watermark_score", opt(r.watermark_score)},
      {"greasy_score", opt(r.greasy_score)},
      {"decision", r.decision == Decision::kPass ? "PASS" : "FAIL"},
      {"violations", r.violations},
  };
}

QualityReport quality_report_from_json(const nlohmann::json& j) {
  try {
    QualityReport r;
    r.record_id = j.at("record_id").get<std::string>();
    r.compression_ratio = j.at("compression_ratio").get<double>();
    r.edge_variance = j.at("edge_variance").get<double>();
    r.bpp = j.at("bpp").get<double>();
    auto opt = [&](const char* key) -> std::optional<double> {
      if (!j.contains(key) || j[key].is_null()) return std::nullopt;
      return j[key].get<double>();
    };
    r.ai_score = opt("ai_score");
    r.watermark_score = opt("watermark_score");
    r.greasy_score = opt("greasy_score");
    const auto decision = j.at("decision").get<std::string>();
    if (decision != "PASS" && decision != "FAIL") throw Error(ErrorCode::kParseError, "decision " + decision);
    r.decision = decision == "PASS" ? Decision::kPass : Decision::kFail;
    r.violations = j.at("violations").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("quality report: ") + e.what());
  }
}

}  // namespace curation

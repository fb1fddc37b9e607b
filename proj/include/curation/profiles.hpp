#pragma once

#include <string>
#include <string_view>

#include "json.hpp"

namespace curation {

enum class Stage { kPT, kCT, kSFT };

std::string_view stage_name(Stage stage);
// Accepts "PT"/"CT"/"SFT" in any case.
Stage parse_stage(std::string_view text);

// Operator cutoffs for one training stage. A record passes an operator when
// its score is >= the min_* bound or <= the max_* bound.
struct ThresholdProfile {
  Stage stage = Stage::kPT;
  double min_compression_ratio = 0.0;
  double min_edge_variance = 0.0;
  double min_bpp = 0.0;
  double min_ai_score = 0.0;
  double max_watermark_score = 1.0;
  double max_greasy_score = 1.0;

  friend bool operator==(const ThresholdProfile&, const ThresholdProfile&) = default;
};

// Most permissive bounds: every finite score passes.
ThresholdProfile permissive_profile(Stage stage);

// True when every threshold of `strict` is at least as demanding as the
// corresponding one of `loose`.
bool at_least_as_strict(const ThresholdProfile& strict, const ThresholdProfile& loose);

struct ProfileSet {
  ThresholdProfile pt;
  ThresholdProfile ct;
  ThresholdProfile sft;
};

// Shipped defaults. Thresholds are configuration calibrated on synthetic
// fixtures; none of them are published constants.
ProfileSet default_profile_set();

// Throws NonMonotoneProfiles unless SFT >= CT >= PT field-wise, and
// InvalidConfig when a probability bound leaves [0, 1] or a minimum is negative.
void validate_profiles(const ProfileSet& set);

ThresholdProfile build_threshold_profile(Stage stage, const ProfileSet& config);

nlohmann::json to_json(const ThresholdProfile& profile);
ThresholdProfile profile_from_json(const nlohmann::json& j);

// Accepts either {"PT": {...}, "CT": {...}, "SFT": {...}} or an array of
// three stage-tagged profiles. Validates before returning.
ProfileSet profile_set_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProfileSet& set);

}  // namespace curation

#include "curation/profiles.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "curation/error.hpp"

namespace curation {

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kPT: return "PT";
    case Stage::kCT: return "CT";
    case Stage::kSFT: return "SFT";
  }
  return "PT";
}

Stage parse_stage(std::string_view text) {
  std::string upper(text);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "PT") return Stage::kPT;
  if (upper == "CT") return Stage::kCT;
  if (upper == "SFT") return Stage::kSFT;
  throw Error(ErrorCode::kInvalidConfig, "unknown stage '" + std::string(text) + "'");
}

ThresholdProfile permissive_profile(Stage stage) {
  ThresholdProfile p;
  p.stage = stage;
  return p;
}

bool at_least_as_strict(const ThresholdProfile& strict, const ThresholdProfile& loose) {
  return strict.min_compression_ratio >= loose.min_compression_ratio &&
         strict.min_edge_variance >= loose.min_edge_variance && strict.min_bpp >= loose.min_bpp &&
         strict.min_ai_score >= loose.min_ai_score &&
         strict.max_watermark_score <= loose.max_watermark_score &&
         strict.max_greasy_score <= loose.max_greasy_score;
}

ProfileSet default_profile_set() {
  ProfileSet set;
  set.pt = {Stage::kPT, 0.01, 10.0, 1.0, 0.02, 0.98, 0.98};
  set.ct = {Stage::kCT, 0.05, 200.0, 2.0, 0.20, 0.80, 0.80};
  set.sft = {Stage::kSFT, 0.12, 500.0, 3.0, 0.40, 0.60, 0.60};
  return set;
}

namespace {

void check_bounds(const ThresholdProfile& p) {
  const std::string stage(stage_name(p.stage));
  auto prob = [&](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, stage + " " + name + " outside [0,1]");
    }
  };
  auto nonneg = [&](double v, const char* name) {
    if (!(v >= 0.0)) throw Error(ErrorCode::kInvalidConfig, stage + " " + name + " negative");
  };
  nonneg(p.min_compression_ratio, "min_compression_ratio");
  nonneg(p.min_edge_variance, "min_edge_variance");
  nonneg(p.min_bpp, "min_bpp");
  prob(p.min_ai_score, "min_ai_score");
  prob(p.max_watermark_score, "max_watermark_score");
  prob(p.max_greasy_score, "max_greasy_score");
}

}  // namespace

void validate_profiles(const ProfileSet& set) {
  if (set.pt.stage != Stage::kPT || set.ct.stage != Stage::kCT || set.sft.stage != Stage::kSFT) {
    throw Error(ErrorCode::kInvalidConfig, "profile set stages are mislabelled");
  }
  check_bounds(set.pt);
  check_bounds(set.ct);
  check_bounds(set.sft);
  if (!at_least_as_strict(set.ct, set.pt)) {
    throw Error(ErrorCode::kNonMonotoneProfiles, "CT profile is looser than PT in some field");
  }
  if (!at_least_as_strict(set.sft, set.ct)) {
    throw Error(ErrorCode::kNonMonotoneProfiles, "SFT profile is looser than CT in some field");
  }
}

ThresholdProfile build_threshold_profile(Stage stage, const ProfileSet& config) {
  validate_profiles(config);
  switch (stage) {
    case Stage::kPT: return config.pt;
    case Stage::kCT: return config.ct;
    case Stage::kSFT: return config.sft;
  }
  return config.pt;
}

nlohmann::json to_json(const ThresholdProfile& p) {
  return {
      {"stage", stage_name(p.stage)},
      {"min_compression_ratio", p.min_compression_ratio},
      {"min_edge_variance", p.min_edge_variance},
      {"min_bpp", p.min_bpp},
      {"min_ai_score", p.min_ai_score},
      {"max_watermark_score", p.max_watermark_score},
      {"max_greasy_score", p.max_greasy_score},
  };
}

ThresholdProfile profile_from_json(const nlohmann::json& j) {
  try {
    ThresholdProfile p;
    p.stage = parse_stage(j.at("stage").get<std::string>());
    p.min_compression_ratio = j.value("min_compression_ratio", 0.0);
    p.min_edge_variance = j.value("min_edge_variance", 0.0);
    p.min_bpp = j.value("min_bpp", 0.0);
    p.min_ai_score = j.value("min_ai_score", 0.0);
    p.max_watermark_score = j.value("max_watermark_score", 1.0);
    p.max_greasy_score = j.value("max_greasy_score", 1.0);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("threshold profile: ") + e.what());
  }
}

ProfileSet profile_set_from_json(const nlohmann::json& j) {
  ProfileSet set;
  bool seen[3] = {false, false, false};
  auto place = [&](ThresholdProfile p) {
    const int slot = static_cast<int>(p.stage);
    if (seen[slot]) throw Error(ErrorCode::kInvalidConfig, "duplicate stage in profile set");
    seen[slot] = true;
    (slot == 0 ? set.pt : slot == 1 ? set.ct : set.sft) = p;
  };
  if (j.is_array()) {
    for (const auto& item : j) place(profile_from_json(item));
  } else if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      nlohmann::json item = value;
      item["stage"] = key;
      place(profile_from_json(item));
    }
  } else {
    throw Error(ErrorCode::kInvalidConfig, "profile set must be an object or array");
  }
  if (!seen[0] || !seen[1] || !seen[2]) {
    throw Error(ErrorCode::kInvalidConfig, "profile set must define PT, CT and SFT");
  }
  validate_profiles(set);
  return set;
}

nlohmann::json to_json(const ProfileSet& set) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto* p : {&set.pt, &set.ct, &set.sft}) {
    nlohmann::json item = to_json(*p);
    item.erase("stage");
    j[std::string(stage_name(p->stage))] = item;
  }
  return j;
}

}  // namespace curation

#include "curation/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "curation/error.hpp"

namespace curation {

std::string_view category_name(PrimaryCategory category) {
  switch (category) {
    case PrimaryCategory::kPhotorealistic: return "PHOTOREALISTIC";
    case PrimaryCategory::kNonPhotorealistic: return "NON_PHOTOREALISTIC";
    case PrimaryCategory::kTextCentric: return "TEXT_CENTRIC";
    case PrimaryCategory::kChart: return "CHART";
    case PrimaryCategory::kMultiImageComposition: return "MULTI_IMAGE_COMPOSITION";
  }
  throw Error(ErrorCode::kUnknownCategory, "category value " + std::to_string(static_cast<int>(category)));
}

PrimaryCategory parse_category(std::string_view text) {
  for (auto c : kAllCategories) {
    if (category_name(c) == text) return c;
  }
  throw Error(ErrorCode::kUnknownCategory, "unknown category '" + std::string(text) + "'");
}

bool AttributeSchema::allows(const std::string& attribute) const {
  return std::find(dimensions.begin(), dimensions.end(), attribute) != dimensions.end();
}

bool AttributeSchema::requires_attribute(const std::string& attribute) const {
  return std::find(required.begin(), required.end(), attribute) != required.end();
}

SchemaTable::SchemaTable(std::vector<std::string> pool, std::map<PrimaryCategory, AttributeSchema> schemas)
    : pool_(std::move(pool)), schemas_(std::move(schemas)) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidSchema, msg); };
  const std::set<std::string> pool_set(pool_.begin(), pool_.end());
  if (pool_.size() != kAttributePoolSize || pool_set.size() != kAttributePoolSize) {
    fail("attribute pool must hold exactly 25 distinct names, got " + std::to_string(pool_set.size()));
  }
  std::set<std::string> covered;
  for (auto category : kAllCategories) {
    auto it = schemas_.find(category);
    if (it == schemas_.end()) fail("no schema for " + std::string(category_name(category)));
    const AttributeSchema& s = it->second;
    if (s.category != category) fail("schema keyed under the wrong category");
    if (s.dimensions.empty()) fail(std::string(category_name(category)) + " schema is empty");
    std::set<std::string> dims;
    for (const auto& d : s.dimensions) {
      if (!pool_set.count(d)) fail("'" + d + "' is not in the attribute pool");
      if (!dims.insert(d).second) fail("'" + d + "' repeated in " + std::string(category_name(category)));
      covered.insert(d);
    }
    for (const auto& r : s.required) {
      if (!dims.count(r)) fail("required '" + r + "' missing from " + std::string(category_name(category)));
    }
  }
  if (covered != pool_set) fail("attribute pool has names no schema uses");
  if (!schemas_.at(PrimaryCategory::kPhotorealistic).allows("lighting")) {
    fail("photorealistic schema must contain 'lighting'");
  }
  if (!schemas_.at(PrimaryCategory::kChart).allows("axis")) fail("chart schema must contain 'axis'");
}

const SchemaTable& SchemaTable::defaults() {
  static const SchemaTable table = [] {
    std::vector<std::string> pool = {
        // general
        "global_semantics", "human_subjects", "objects_and_props", "background_environment",
        "spatial_layout", "visual_composition",
        // photorealistic
        "lighting", "camera_viewpoint", "depth_of_field", "color_tone", "texture_detail",
        // non-photorealistic
        "art_style", "medium", "color_palette", "mood_atmosphere",
        // text-centric
        "text_content", "typography", "text_layout",
        // chart
        "chart_type", "axis", "data_series", "legend",
        // multi-image composition
        "panel_count", "panel_arrangement", "inter_panel_relation"};
    std::map<PrimaryCategory, AttributeSchema> schemas;
    schemas[PrimaryCategory::kPhotorealistic] = {
        PrimaryCategory::kPhotorealistic,
        {"global_semantics", "human_subjects", "objects_and_props", "background_environment", "spatial_layout",
         "visual_composition", "lighting", "camera_viewpoint", "depth_of_field", "color_tone", "texture_detail"},
        {"global_semantics", "lighting"}};
    schemas[PrimaryCategory::kNonPhotorealistic] = {
        PrimaryCategory::kNonPhotorealistic,
        {"global_semantics", "human_subjects", "objects_and_props", "background_environment", "spatial_layout",
         "visual_composition", "art_style", "medium", "color_palette", "mood_atmosphere"},
        {"global_semantics", "art_style"}};
    schemas[PrimaryCategory::kTextCentric] = {
        PrimaryCategory::kTextCentric,
        {"global_semantics", "text_content", "typography", "text_layout", "background_environment",
         "visual_composition", "color_palette"},
        {"global_semantics", "text_content"}};
    schemas[PrimaryCategory::kChart] = {
        PrimaryCategory::kChart,
        {"global_semantics", "chart_type", "axis", "data_series", "legend", "text_content", "spatial_layout"},
        {"global_semantics", "chart_type", "axis"}};
    schemas[PrimaryCategory::kMultiImageComposition] = {
        PrimaryCategory::kMultiImageComposition,
        {"global_semantics", "panel_count", "panel_arrangement", "inter_panel_relation", "visual_composition",
         "spatial_layout", "human_subjects", "objects_and_props"},
        {"global_semantics", "panel_count"}};
    return SchemaTable(std::move(pool), std::move(schemas));
  }();
  return table;
}

SchemaTable SchemaTable::from_json(const nlohmann::json& j) {
  try {
    auto pool = j.at("pool").get<std::vector<std::string>>();
    std::map<PrimaryCategory, AttributeSchema> schemas;
    for (const auto& [name, body] : j.at("schemas").items()) {
      const PrimaryCategory category = parse_category(name);
      AttributeSchema s;
      s.category = category;
      s.dimensions = body.at("dimensions").get<std::vector<std::string>>();
      s.required = body.value("required", std::vector<std::string>{});
      schemas[category] = std::move(s);
    }
    return SchemaTable(std::move(pool), std::move(schemas));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSchema, std::string("schema table: ") + e.what());
  }
}

nlohmann::json SchemaTable::to_json() const {
  nlohmann::json schemas = nlohmann::json::object();
  for (const auto& [category, s] : schemas_) {
    schemas[std::string(category_name(category))] = {{"dimensions", s.dimensions}, {"required", s.required}};
  }
  return {{"pool", pool_}, {"schemas", schemas}};
}

const AttributeSchema& SchemaTable::schema(PrimaryCategory category) const {
  auto it = schemas_.find(category);
  if (it == schemas_.end()) {
    throw Error(ErrorCode::kUnknownCategory, "no schema for category " + std::to_string(static_cast<int>(category)));
  }
  return it->second;
}

const AttributeSchema& attribute_schema(PrimaryCategory category) {
  return SchemaTable::defaults().schema(category);
}

PrimaryCategory route_category(const RoutingSignals& signals) {
  if (signals.manual_label) {
    (void)category_name(*signals.manual_label);  // rejects out-of-range values
    return *signals.manual_label;
  }
  if (!signals.distribution) throw Error(ErrorCode::kNoSignal, "neither a manual label nor a distribution");
  const auto& d = *signals.distribution;
  for (double p : d) {
    if (!std::isfinite(p) || p < 0.0) throw Error(ErrorCode::kNoSignal, "distribution must be finite and non-negative");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] > d[best]) best = i;
  }
  return kAllCategories[best];
}

}  // namespace curation

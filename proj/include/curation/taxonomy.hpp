#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace curation {

// Declaration order is the routing tie-break order.
enum class PrimaryCategory {
  kPhotorealistic,
  kNonPhotorealistic,
  kTextCentric,
  kChart,
  kMultiImageComposition,
};

inline constexpr std::array<PrimaryCategory, 5> kAllCategories = {
    PrimaryCategory::kPhotorealistic, PrimaryCategory::kNonPhotorealistic, PrimaryCategory::kTextCentric,
    PrimaryCategory::kChart, PrimaryCategory::kMultiImageComposition};

std::string_view category_name(PrimaryCategory category);
// Throws UnknownCategory.
PrimaryCategory parse_category(std::string_view text);

inline constexpr std::size_t kAttributePoolSize = 25;

struct AttributeSchema {
  PrimaryCategory category = PrimaryCategory::kPhotorealistic;
  std::vector<std::string> dimensions;  // schema order
  std::vector<std::string> required;    // subset of dimensions

  bool allows(const std::string& attribute) const;
  bool requires_attribute(const std::string& attribute) const;
};

// The global attribute pool plus one schema per category, validated on
// construction: pool of exactly 25 distinct names, every schema drawn from
// the pool, required within dimensions, union of schemas equal to the pool,
// "lighting" in the photorealistic schema and "axis" in the chart schema.
class SchemaTable {
 public:
  SchemaTable(std::vector<std::string> pool, std::map<PrimaryCategory, AttributeSchema> schemas);

  static const SchemaTable& defaults();
  static SchemaTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const std::vector<std::string>& pool() const { return pool_; }
  // Throws UnknownCategory.
  const AttributeSchema& schema(PrimaryCategory category) const;

 private:
  std::vector<std::string> pool_;
  std::map<PrimaryCategory, AttributeSchema> schemas_;
};

const AttributeSchema& attribute_schema(PrimaryCategory category);

// A manual label, a classifier distribution over the five categories (in
// enumeration order), or both.
struct RoutingSignals {
  std::optional<PrimaryCategory> manual_label;
  std::optional<std::array<double, 5>> distribution;
};

// Manual label wins; otherwise argmax with ties to the earlier category.
// Throws NoSignal when neither is present or the distribution is not a
// finite non-negative vector.
PrimaryCategory route_category(const RoutingSignals& signals);

}  // namespace curation

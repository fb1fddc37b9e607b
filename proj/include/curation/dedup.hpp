#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "curation/embedding.hpp"
#include "curation/manifest.hpp"
#include "curation/quality.hpp"
#include "json.hpp"

namespace curation {

inline constexpr double kDefaultDedupThreshold = 0.92;
// Above this many records candidate pairs come from index radius queries.
inline constexpr std::size_t kRadiusSearchCutoff = 10000;

struct DuplicateGroup {
  std::string representative;
  std::vector<std::string> members;  // ascending, includes the representative
  double max_internal_similarity = 0.0;

  friend bool operator==(const DuplicateGroup&, const DuplicateGroup&) = default;
};

using QualityMap = std::map<std::string, QualityReport>;

// Single-link grouping: an edge joins two records when cosine >= threshold and
// every connected component of size >= 2 becomes a group. Groups are ordered
// by their smallest member id.
//
// Representative: with a quality map, PASS beats FAIL, then higher bpp, then
// the lower record_id; records missing from the map rank last. Without a map,
// the lowest record_id. Throws DimensionMismatch.
std::vector<DuplicateGroup> find_near_duplicates(const std::map<std::string, EmbeddingVector>& vectors,
                                                 double threshold = kDefaultDedupThreshold,
                                                 const QualityMap* quality = nullptr);

enum class DedupPolicy { kKeepRepresentative, kDropAllDupes };

std::string_view policy_name(DedupPolicy policy);
DedupPolicy parse_policy(std::string_view text);

// Ungrouped records are always kept and input order is preserved. Applying
// the same groups twice equals applying them once, so non-representative
// members may already be absent. Throws UnknownRecordInGroup when a group's
// representative is absent and the group cannot stem from an earlier pass.
Manifest dedup_manifest(const Manifest& manifest, std::span<const DuplicateGroup> groups, DedupPolicy policy);

nlohmann::json to_json(const DuplicateGroup& group);
DuplicateGroup duplicate_group_from_json(const nlohmann::json& j);

void save_groups(const std::string& path, std::span<const DuplicateGroup> groups);
std::vector<DuplicateGroup> load_groups(const std::string& path);

}  // namespace curation

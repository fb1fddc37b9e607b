#include "curation/dedup.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>

#include "curation/error.hpp"
#include "curation/vector_index.hpp"

namespace curation {

namespace {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

// True when a should be the representative over b.
bool better_representative(const std::string& a, const std::string& b, const QualityMap* quality) {
  if (quality) {
    auto ia = quality->find(a);
    auto ib = quality->find(b);
    const bool ha = ia != quality->end();
    const bool hb = ib != quality->end();
    if (ha != hb) return ha;
    if (ha) {
      if (ia->second.passed() != ib->second.passed()) return ia->second.passed();
      if (ia->second.bpp != ib->second.bpp) return ia->second.bpp > ib->second.bpp;
    }
  }
  return a < b;
}

}  // namespace

std::vector<DuplicateGroup> find_near_duplicates(const std::map<std::string, EmbeddingVector>& vectors,
                                                 double threshold, const QualityMap* quality) {
  std::vector<const std::string*> ids;
  std::vector<const std::vector<float>*> vecs;
  ids.reserve(vectors.size());
  vecs.reserve(vectors.size());
  for (const auto& [id, v] : vectors) {
    if (!vecs.empty() && v.dim() != vecs.front()->size()) {
      throw Error(ErrorCode::kDimensionMismatch, "record '" + id + "' has dimension " + std::to_string(v.dim()) +
                                                     ", expected " + std::to_string(vecs.front()->size()));
    }
    ids.push_back(&id);
    vecs.push_back(&v.values);
  }
  const std::size_t n = ids.size();
  DisjointSets sets(n);

  if (n > kRadiusSearchCutoff) {
    VectorIndex index(vecs.front()->size());
    std::unordered_map<std::string, std::size_t> slot;
    for (std::size_t i = 0; i < n; ++i) {
      index.insert(*ids[i], *vecs[i]);
      slot[*ids[i]] = i;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (const auto& hit : index.search_radius(*vecs[i], threshold)) sets.unite(i, slot.at(hit.record_id));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (cosine(*vecs[i], *vecs[j]) >= threshold) sets.unite(i, j);
      }
    }
  }

  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t i = 0; i < n; ++i) components[sets.find(i)].push_back(i);

  std::vector<DuplicateGroup> groups;
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    DuplicateGroup g;
    double best = -1.0;
    for (std::size_t a = 0; a < members.size(); ++a) {
      g.members.push_back(*ids[members[a]]);
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        best = std::max(best, cosine(*vecs[members[a]], *vecs[members[b]]));
      }
    }
    g.max_internal_similarity = best;
    g.representative = g.members.front();
    for (const auto& m : g.members) {
      if (better_representative(m, g.representative, quality)) g.representative = m;
    }
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(),
            [](const DuplicateGroup& a, const DuplicateGroup& b) { return a.members.front() < b.members.front(); });
  return groups;
}

std::string_view policy_name(DedupPolicy policy) {
  return policy == DedupPolicy::kKeepRepresentative ? "KEEP_REPRESENTATIVE" : "DROP_ALL_DUPES";
}

DedupPolicy parse_policy(std::string_view text) {
  if (text == "KEEP_REPRESENTATIVE") return DedupPolicy::kKeepRepresentative;
  if (text == "DROP_ALL_DUPES") return DedupPolicy::kDropAllDupes;
  throw Error(ErrorCode::kInvalidConfig, "unknown dedup policy '" + std::string(text) + "'");
}

Manifest dedup_manifest(const Manifest& manifest, std::span<const DuplicateGroup> groups, DedupPolicy policy) {
  std::set<std::string> present;
  for (const auto& e : manifest.entries) present.insert(e.record_id);
  std::set<std::string> drop;
  for (const auto& g : groups) {
    // Members removed by an earlier pass with the same groups may be gone; a
    // missing representative is only consistent with a finished DROP_ALL pass.
    if (!present.count(g.representative)) {
      const bool any_left = std::any_of(g.members.begin(), g.members.end(),
                                        [&](const std::string& m) { return present.count(m) > 0; });
      if (policy == DedupPolicy::kKeepRepresentative || any_left) {
        throw Error(ErrorCode::kUnknownRecordInGroup, "'" + g.representative + "' is not in the manifest");
      }
    }
    for (const auto& m : g.members) {
      if (policy == DedupPolicy::kDropAllDupes || m != g.representative) drop.insert(m);
    }
  }
  Manifest out;
  out.metadata = manifest.metadata;
  for (const auto& e : manifest.entries) {
    if (!drop.count(e.record_id)) out.entries.push_back(e);
  }
  return out;
}

nlohmann::json to_json(const DuplicateGroup& g) {
  return {{"representative", g.representative},
          {"members", g.members},
          {"max_internal_similarity", g.max_internal_similarity}};
}

DuplicateGroup duplicate_group_from_json(const nlohmann::json& j) {
  try {
    DuplicateGroup g;
    g.representative = j.at("representative").get<std::string>();
    g.members = j.at("members").get<std::vector<std::string>>();
    g.max_internal_similarity = j.value("max_internal_similarity", 0.0);
    if (std::find(g.members.begin(), g.members.end(), g.representative) == g.members.end()) {
      throw Error(ErrorCode::kParseError, "representative '" + g.representative + "' is not a member");
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("duplicate group: ") + e.what());
  }
}

void save_groups(const std::string& path, std::span<const DuplicateGroup> groups) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  for (const auto& g : groups) out << to_json(g).dump() << '\n';
}

std::vector<DuplicateGroup> load_groups(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::vector<DuplicateGroup> groups;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      groups.push_back(duplicate_group_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path + ": " + e.what());
    }
  }
  return groups;
}

}  // namespace curation

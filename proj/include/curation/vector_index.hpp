#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "curation/embedding.hpp"

namespace curation {

struct ResultEntry {
  std::string record_id;
  double similarity = 0.0;
  std::optional<int> cluster_id;

  friend bool operator==(const ResultEntry&, const ResultEntry&) = default;
};

// Sorted by similarity descending, ties by ascending record_id.
bool ranks_before(const ResultEntry& a, const ResultEntry& b);

// Graph parameters for the hierarchical navigable small-world structure.
struct HnswParams {
  std::size_t m = 16;                // links per node above layer 0; layer 0 keeps 2m
  std::size_t ef_construction = 128;
  std::size_t ef_search = 1000;
  std::uint64_t seed = 42;
};

using ExclusionSet = std::set<std::string>;

// Cosine-metric vector store with an exact scan and an approximate graph
// search. Searches take a shared lock; insert, build and load are exclusive.
// Any insert after build() invalidates the graph until the next build().
class VectorIndex {
 public:
  explicit VectorIndex(std::size_t dim, HnswParams params = {});
  VectorIndex(VectorIndex&& other) noexcept;
  VectorIndex& operator=(VectorIndex&& other) noexcept;
  VectorIndex(const VectorIndex&) = delete;
  VectorIndex& operator=(const VectorIndex&) = delete;

  std::size_t dim() const { return dim_; }
  std::size_t size() const;
  bool built() const;
  const HnswParams& params() const { return params_; }

  // Upsert. Throws DimensionMismatch, or InvalidQuery for a non-unit vector.
  void insert(const std::string& record_id, const EmbeddingVector& vector);
  void insert(const std::string& record_id, std::span<const float> unit_vector);

  bool contains(const std::string& record_id) const;
  // Copy of the stored vector. Throws NotFound.
  std::vector<float> vector_of(const std::string& record_id) const;
  std::vector<std::string> record_ids() const;

  void build();

  // Full scan, exact=true. Throws EmptyIndex.
  std::vector<ResultEntry> search_exact(std::span<const float> query, std::size_t k,
                                        const ExclusionSet* excluded = nullptr) const;

  // Graph search. Throws EmptyIndex, IndexNotBuilt.
  std::vector<ResultEntry> search_ann(std::span<const float> query, std::size_t k,
                                      const ExclusionSet* excluded = nullptr) const;

  // Every record with cosine >= min_similarity, exact scan, ranked.
  std::vector<ResultEntry> search_radius(std::span<const float> query, double min_similarity) const;

  // Header: JSON metadata. Blob: version byte, then little-endian tables.
  void save(const std::string& header_path, const std::string& blob_path) const;
  static VectorIndex load(const std::string& header_path, const std::string& blob_path);

 private:
  struct Candidate {
    float distance;
    std::uint32_t node;
  };

  const float* data_of(std::uint32_t node) const { return vectors_.data() + static_cast<std::size_t>(node) * dim_; }
  float distance(const float* a, const float* b) const;
  void check_query(std::span<const float> query) const;

  std::vector<Candidate> search_layer(const float* query, std::uint32_t entry, std::size_t ef,
                                      int layer) const;
  std::vector<std::uint32_t> select_neighbors(const float* base, std::vector<Candidate> candidates,
                                              std::size_t limit) const;
  void link_node(std::uint32_t node, int level);
  std::vector<ResultEntry> finalize(std::span<const float> query, const std::vector<std::uint32_t>& nodes,
                                    std::size_t k, const ExclusionSet* excluded) const;

  std::size_t dim_;
  HnswParams params_;
  mutable std::shared_mutex mutex_;

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::uint32_t> slot_of_;
  std::vector<float> vectors_;

  bool built_ = false;
  std::vector<int> levels_;
  // links_[node][layer] -> neighbour nodes
  std::vector<std::vector<std::vector<std::uint32_t>>> links_;
  std::uint32_t entry_point_ = 0;
  int max_level_ = -1;
};

}  // namespace curation

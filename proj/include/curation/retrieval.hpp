#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "curation/embedding.hpp"
#include "curation/error.hpp"
#include "curation/vector_index.hpp"
#include "json.hpp"

namespace curation {

enum class QueryMode { kImage, kMultiImage, kText, kHybrid, kBatch };

std::string_view mode_name(QueryMode mode);
// Accepts the wire names (IMAGE, MULTI_IMAGE, ...) and the CLI spellings
// (image, multi, text, hybrid, batch).
QueryMode parse_mode(std::string_view text);

struct RetrievalQuery {
  QueryMode mode = QueryMode::kImage;
  std::vector<EmbeddingVector> seeds;
  double hybrid_alpha = 0.5;
  std::size_t k = 10;
  std::size_t diversity_clusters = 0;  // 0 disables re-ranking
  std::size_t candidate_multiplier = 5;
  bool exact = false;                  // full scan instead of the graph
  std::uint64_t rerank_seed = 0;
  ExclusionSet excluded;               // records that must never be returned
};

struct ResultSet {
  std::vector<ResultEntry> entries;
  RetrievalQuery query_echo;
  bool exact = false;
};

// Throws InvalidQuery naming the violated arity or range rule.
void validate_query(const RetrievalQuery& query);

// Normalized arithmetic mean of >= 2 unit seeds. Throws InvalidQuery for
// fewer seeds, DimensionMismatch, DegenerateAggregate.
EmbeddingVector aggregate_multi(std::span<const EmbeddingVector> seeds);

// normalize(alpha * image + (1 - alpha) * text).
EmbeddingVector compose_hybrid(const EmbeddingVector& image, const EmbeddingVector& text, double alpha);

// The single vector a non-batch query searches with.
EmbeddingVector query_vector(const RetrievalQuery& query);

// BATCH queries fan out into one single-seed query per seed (IMAGE or TEXT by
// the seed's modality), inheriting every other knob.
std::vector<RetrievalQuery> expand_batch(const RetrievalQuery& query);

// Runs one non-batch query: search (exact or graph), exclusion, optional
// diversity re-ranking over candidate_multiplier * k candidates.
ResultSet execute_query(const VectorIndex& index, const RetrievalQuery& query);

using BatchItem = std::variant<ResultSet, Error>;

// Positionally aligned with `queries`; a failing element holds its Error and
// does not abort the batch.
std::vector<BatchItem> batch_search(const VectorIndex& index, std::span<const RetrievalQuery> queries);

// k-means result: assignment[i] is the cluster of point i.
struct Clustering {
  std::vector<int> assignment;
  std::vector<std::vector<double>> centroids;
  int iterations = 0;
};

inline constexpr int kKmeansMaxIterations = 50;
inline constexpr double kKmeansTolerance = 1e-6;

// Lloyd iterations with k-means++ seeding from a seeded generator. Empty
// clusters are re-seeded with the point farthest from its centroid.
Clustering kmeans(std::span<const std::vector<float>> points, std::size_t clusters, std::uint64_t seed,
                  int max_iterations = kKmeansMaxIterations, double tolerance = kKmeansTolerance);

// Clusters the candidates, orders clusters by their best similarity, then
// emits round-robin across clusters (each cluster in similarity order) until
// k entries. `vectors` is aligned with candidates.entries.
ResultSet diversity_rerank(const ResultSet& candidates, std::span<const std::vector<float>> vectors,
                           std::size_t clusters, std::size_t k, std::uint64_t seed);

// Fetches the candidate vectors from the index.
ResultSet diversity_rerank(const ResultSet& candidates, const VectorIndex& index, std::size_t clusters,
                           std::size_t k, std::uint64_t seed);

nlohmann::json to_json(const ResultEntry& entry);
nlohmann::json to_json(const ResultSet& results);
nlohmann::json to_json(const RetrievalQuery& query);

}  // namespace curation

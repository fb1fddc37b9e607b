#include "curation/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace curation {

std::string_view mode_name(QueryMode mode) {
  switch (mode) {
    case QueryMode::kImage: return "IMAGE";
    case QueryMode::kMultiImage: return "MULTI_IMAGE";
    case QueryMode::kText: return "TEXT";
    case QueryMode::kHybrid: return "HYBRID";
    case QueryMode::kBatch: return "BATCH";
  }
  return "IMAGE";
}

QueryMode parse_mode(std::string_view text) {
  if (text == "IMAGE" || text == "image") return QueryMode::kImage;
  if (text == "MULTI_IMAGE" || text == "multi" || text == "multi_image") return QueryMode::kMultiImage;
  if (text == "TEXT" || text == "text") return QueryMode::kText;
  if (text == "HYBRID" || text == "hybrid") return QueryMode::kHybrid;
  if (text == "BATCH" || text == "batch") return QueryMode::kBatch;
  throw Error(ErrorCode::kInvalidQuery, "unknown mode '" + std::string(text) + "'");
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::kInvalidQuery, message);
}

std::size_t count_modality(const RetrievalQuery& q, Modality m) {
  return static_cast<std::size_t>(std::count_if(q.seeds.begin(), q.seeds.end(),
                                                [m](const EmbeddingVector& v) { return v.modality == m; }));
}

double squared_distance(std::span<const float> p, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - c[i];
    s += d * d;
  }
  return s;
}

}  // namespace

void validate_query(const RetrievalQuery& q) {
  require(q.k >= 1, "k must be >= 1");
  require(q.candidate_multiplier >= 1, "candidate_multiplier must be >= 1");
  require(q.hybrid_alpha >= 0.0 && q.hybrid_alpha <= 1.0, "hybrid_alpha must lie in [0,1]");
  require(!q.seeds.empty(), "query needs at least one seed");
  const std::size_t dim = q.seeds.front().dim();
  for (const auto& s : q.seeds) {
    require(s.dim() == dim && dim > 0, "seed dimensions differ");
    require(std::abs(l2_norm(s.values) - 1.0) <= kUnitNormTolerance, "seed vector is not unit-norm");
  }
  const std::size_t n = q.seeds.size();
  switch (q.mode) {
    case QueryMode::kImage:
      require(n == 1 && count_modality(q, Modality::kImage) == 1, "IMAGE mode takes exactly one image seed");
      break;
    case QueryMode::kText:
      require(n == 1 && count_modality(q, Modality::kText) == 1, "TEXT mode takes exactly one text seed");
      break;
    case QueryMode::kMultiImage:
      require(n >= 2, "MULTI_IMAGE mode needs at least two seeds");
      require(count_modality(q, Modality::kImage) == n, "MULTI_IMAGE seeds must all be images");
      break;
    case QueryMode::kHybrid:
      require(n == 2 && count_modality(q, Modality::kImage) == 1 && count_modality(q, Modality::kText) == 1,
              "HYBRID mode takes exactly one image seed and one text seed");
      break;
    case QueryMode::kBatch:
      break;
  }
}

EmbeddingVector aggregate_multi(std::span<const EmbeddingVector> seeds) {
  require(seeds.size() >= 2, "aggregate_multi needs at least two seeds");
  const std::size_t dim = seeds.front().dim();
  std::vector<double> sum(dim, 0.0);
  for (const auto& s : seeds) {
    if (s.dim() != dim) throw Error(ErrorCode::kDimensionMismatch, "seed dimensions differ");
    for (std::size_t i = 0; i < dim; ++i) sum[i] += s.values[i];
  }
  for (auto& x : sum) x /= static_cast<double>(seeds.size());
  EmbeddingVector out;
  out.values = normalize(std::span<const double>(sum));
  out.modality = Modality::kImage;
  out.provider_id = seeds.front().provider_id;
  return out;
}

EmbeddingVector compose_hybrid(const EmbeddingVector& image, const EmbeddingVector& text, double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, "hybrid_alpha must lie in [0,1]");
  if (image.dim() != text.dim()) throw Error(ErrorCode::kDimensionMismatch, "hybrid operands differ in dim");
  std::vector<double> mix(image.dim());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    mix[i] = alpha * image.values[i] + (1.0 - alpha) * text.values[i];
  }
  EmbeddingVector out;
  out.values = normalize(std::span<const double>(mix));
  out.modality = Modality::kImage;
  out.provider_id = image.provider_id;
  return out;
}

EmbeddingVector query_vector(const RetrievalQuery& q) {
  validate_query(q);
  switch (q.mode) {
    case QueryMode::kImage:
    case QueryMode::kText:
      return q.seeds.front();
    case QueryMode::kMultiImage:
      return aggregate_multi(q.seeds);
    case QueryMode::kHybrid: {
      const bool image_first = q.seeds[0].modality == Modality::kImage;
      return compose_hybrid(q.seeds[image_first ? 0 : 1], q.seeds[image_first ? 1 : 0], q.hybrid_alpha);
    }
    case QueryMode::kBatch:
      break;
  }
  throw Error(ErrorCode::kInvalidQuery, "BATCH queries must be expanded with expand_batch");
}

std::vector<RetrievalQuery> expand_batch(const RetrievalQuery& q) {
  require(q.mode == QueryMode::kBatch, "expand_batch expects a BATCH query");
  validate_query(q);
  std::vector<RetrievalQuery> out;
  out.reserve(q.seeds.size());
  for (const auto& seed : q.seeds) {
    RetrievalQuery single = q;
    single.mode = seed.modality == Modality::kImage ? QueryMode::kImage : QueryMode::kText;
    single.seeds = {seed};
    out.push_back(std::move(single));
  }
  return out;
}

ResultSet execute_query(const VectorIndex& index, const RetrievalQuery& q) {
  const EmbeddingVector qv = query_vector(q);
  auto search = [&](std::size_t k) {
    return q.exact ? index.search_exact(qv.values, k, &q.excluded) : index.search_ann(qv.values, k, &q.excluded);
  };
  ResultSet out;
  out.query_echo = q;
  out.exact = q.exact;
  if (q.diversity_clusters == 0) {
    out.entries = search(q.k);
    return out;
  }
  const std::size_t pool = std::min(q.k * q.candidate_multiplier, index.size());
  ResultSet candidates;
  candidates.entries = search(pool);
  candidates.query_echo = q;
  candidates.exact = q.exact;
  if (candidates.entries.empty()) return out;
  const std::size_t k = std::min(q.k, candidates.entries.size());
  ResultSet reranked = diversity_rerank(candidates, index, q.diversity_clusters, k, q.rerank_seed);
  reranked.query_echo = q;
  reranked.exact = q.exact;
  return reranked;
}

std::vector<BatchItem> batch_search(const VectorIndex& index, std::span<const RetrievalQuery> queries) {
  std::vector<BatchItem> out;
  out.reserve(queries.size());
  for (const auto& q : queries) {
    try {
      out.emplace_back(execute_query(index, q));
    } catch (const Error& e) {
      out.emplace_back(e);
    }
  }
  return out;
}

Clustering kmeans(std::span<const std::vector<float>> points, std::size_t clusters, std::uint64_t seed,
                  int max_iterations, double tolerance) {
  const std::size_t n = points.size();
  if (n == 0) throw Error(ErrorCode::kInsufficientCandidates, "k-means on no points");
  if (clusters == 0) throw Error(ErrorCode::kInvalidQuery, "k-means needs at least one cluster");
  const std::size_t k = std::min(clusters, n);
  const std::size_t dim = points.front().size();
  Rng rng(seed);

  // k-means++ seeding.
  Clustering result;
  std::vector<std::size_t> chosen;
  chosen.push_back(static_cast<std::size_t>(rng.below(n)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  auto to_centroid = [&](std::size_t i) { return std::vector<double>(points[i].begin(), points[i].end()); };
  result.centroids.push_back(to_centroid(chosen.back()));
  while (result.centroids.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(points[i], result.centroids.back()));
      total += nearest[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += nearest[i];
        if (nearest[i] > 0.0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        for (std::size_t i = n; i-- > 0;) {
          if (nearest[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a centroid; take the first unused.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) pick = i;
      }
    }
    chosen.push_back(pick);
    result.centroids.push_back(to_centroid(pick));
  }

  result.assignment.assign(n, 0);
  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter + 1;
    std::vector<double> own_distance(n);
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = squared_distance(points[i], result.centroids[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = squared_distance(points[i], result.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      result.assignment[i] = best;
      own_distance[i] = best_d;
    }

    std::vector<std::size_t> counts(k, 0);
    for (int a : result.assignment) ++counts[static_cast<std::size_t>(a)];
    std::vector<bool> moved(n, false);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (moved[i] || counts[static_cast<std::size_t>(result.assignment[i])] <= 1) continue;
        if (far == n || own_distance[i] > own_distance[far]) far = i;
      }
      if (far == n) continue;
      --counts[static_cast<std::size_t>(result.assignment[far])];
      result.assignment[far] = static_cast<int>(c);
      ++counts[c];
      moved[far] = true;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      std::vector<double> mean(dim, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(result.assignment[i]) != c) continue;
        for (std::size_t d = 0; d < dim; ++d) mean[d] += points[i][d];
      }
      double delta = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        mean[d] /= static_cast<double>(counts[c]);
        const double diff = mean[d] - result.centroids[c][d];
        delta += diff * diff;
      }
      shift = std::max(shift, std::sqrt(delta));
      result.centroids[c] = std::move(mean);
    }
    if (shift < tolerance) break;
  }
  return result;
}

ResultSet diversity_rerank(const ResultSet& candidates, std::span<const std::vector<float>> vectors,
                           std::size_t clusters, std::size_t k, std::uint64_t seed) {
  const std::size_t n = candidates.entries.size();
  if (n == 0) throw Error(ErrorCode::kInsufficientCandidates, "no candidates to re-rank");
  if (k > n) {
    throw Error(ErrorCode::kInsufficientCandidates,
                "k=" + std::to_string(k) + " exceeds " + std::to_string(n) + " candidates");
  }
  if (clusters == 0) throw Error(ErrorCode::kInvalidQuery, "diversity re-ranking needs clusters >= 1");
  if (vectors.size() != n) throw Error(ErrorCode::kDimensionMismatch, "vectors not aligned with candidates");

  const Clustering clustering = kmeans(vectors, clusters, seed);
  const std::size_t used = std::min(clusters, n);
  std::vector<std::vector<std::size_t>> members(used);
  for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(clustering.assignment[i])].push_back(i);
  const auto& e = candidates.entries;
  for (auto& m : members) {
    std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return ranks_before(e[a], e[b]); });
  }
  members.erase(std::remove_if(members.begin(), members.end(), [](const auto& m) { return m.empty(); }),
                members.end());
  std::sort(members.begin(), members.end(),
            [&](const auto& a, const auto& b) { return ranks_before(e[a.front()], e[b.front()]); });

  ResultSet out;
  out.query_echo = candidates.query_echo;
  out.exact = candidates.exact;
  for (std::size_t round = 0; out.entries.size() < k; ++round) {
    for (std::size_t c = 0; c < members.size() && out.entries.size() < k; ++c) {
      if (round >= members[c].size()) continue;
      ResultEntry entry = e[members[c][round]];
      entry.cluster_id = static_cast<int>(c);
      out.entries.push_back(std::move(entry));
    }
  }
  return out;
}

ResultSet diversity_rerank(const ResultSet& candidates, const VectorIndex& index, std::size_t clusters,
                           std::size_t k, std::uint64_t seed) {
  std::vector<std::vector<float>> vectors;
  vectors.reserve(candidates.entries.size());
  for (const auto& entry : candidates.entries) vectors.push_back(index.vector_of(entry.record_id));
  return diversity_rerank(candidates, vectors, clusters, k, seed);
}

nlohmann::json to_json(const ResultEntry& entry) {
  nlohmann::json j = {{"record_id", entry.record_id}, {"similarity", entry.similarity}};
  if (entry.cluster_id) j["cluster_id"] = *entry.cluster_id;
  return j;
}

nlohmann::json to_json(const ResultSet& results) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : results.entries) entries.push_back(to_json(e));
  return {{"entries", entries}, {"exact", results.exact}, {"query_echo", to_json(results.query_echo)}};
}

nlohmann::json to_json(const RetrievalQuery& q) {
  nlohmann::json seeds = nlohmann::json::array();
  for (const auto& s : q.seeds) seeds.push_back(to_json(s));
  return {
      {"mode", mode_name(q.mode)},
      {"seeds", seeds},
      {"hybrid_alpha", q.hybrid_alpha},
      {"k", q.k},
      {"diversity_clusters", q.diversity_clusters},
      {"candidate_multiplier", q.candidate_multiplier},
      {"exact", q.exact},
      {"rerank_seed", q.rerank_seed},
      {"excluded", q.excluded},
  };
}

}  // namespace curation

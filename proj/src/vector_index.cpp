#include "curation/vector_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <mutex>
#include <queue>

#include "curation/error.hpp"
#include "json.hpp"

namespace curation {

namespace {

constexpr std::uint8_t kBlobVersion = 1;
constexpr int kMaxLevel = 16;

bool closer(float da, std::uint32_t na, float db, std::uint32_t nb) {
  return da < db || (da == db && na < nb);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v), static_cast<char>(v >> 8), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 24)};
  out.write(bytes, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

void put_f32(std::ostream& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw Error(ErrorCode::kParseError, "index blob truncated");
  return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
         (std::uint32_t{b[3]} << 24);
}

std::uint64_t get_u64(std::istream& in) {
  const std::uint64_t lo = get_u32(in);
  const std::uint64_t hi = get_u32(in);
  return lo | (hi << 32);
}

float get_f32(std::istream& in) {
  const std::uint32_t bits = get_u32(in);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

}  // namespace

bool ranks_before(const ResultEntry& a, const ResultEntry& b) {
  if (a.similarity != b.similarity) return a.similarity > b.similarity;
  return a.record_id < b.record_id;
}

VectorIndex::VectorIndex(std::size_t dim, HnswParams params) : dim_(dim), params_(params) {
  if (dim_ == 0) throw Error(ErrorCode::kInvalidConfig, "index dimension must be positive");
  if (params_.m < 2) throw Error(ErrorCode::kInvalidConfig, "HNSW m must be >= 2");
}

VectorIndex::VectorIndex(VectorIndex&& other) noexcept : dim_(other.dim_), params_(other.params_) {
  std::unique_lock lock(other.mutex_);
  ids_ = std::move(other.ids_);
  slot_of_ = std::move(other.slot_of_);
  vectors_ = std::move(other.vectors_);
  built_ = other.built_;
  levels_ = std::move(other.levels_);
  links_ = std::move(other.links_);
  entry_point_ = other.entry_point_;
  max_level_ = other.max_level_;
}

VectorIndex& VectorIndex::operator=(VectorIndex&& other) noexcept {
  if (this == &other) return *this;
  std::scoped_lock lock(mutex_, other.mutex_);
  dim_ = other.dim_;
  params_ = other.params_;
  ids_ = std::move(other.ids_);
  slot_of_ = std::move(other.slot_of_);
  vectors_ = std::move(other.vectors_);
  built_ = other.built_;
  levels_ = std::move(other.levels_);
  links_ = std::move(other.links_);
  entry_point_ = other.entry_point_;
  max_level_ = other.max_level_;
  return *this;
}

std::size_t VectorIndex::size() const {
  std::shared_lock lock(mutex_);
  return ids_.size();
}

bool VectorIndex::built() const {
  std::shared_lock lock(mutex_);
  return built_;
}

void VectorIndex::insert(const std::string& record_id, const EmbeddingVector& vector) {
  insert(record_id, std::span<const float>(vector.values));
}

void VectorIndex::insert(const std::string& record_id, std::span<const float> unit_vector) {
  if (unit_vector.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "index dim " + std::to_string(dim_) + ", vector dim " +
                                                   std::to_string(unit_vector.size()));
  }
  if (std::abs(l2_norm(unit_vector) - 1.0) > kUnitNormTolerance) {
    throw Error(ErrorCode::kInvalidQuery, "vector for '" + record_id + "' is not unit-norm");
  }
  std::unique_lock lock(mutex_);
  auto it = slot_of_.find(record_id);
  if (it != slot_of_.end()) {
    std::copy(unit_vector.begin(), unit_vector.end(), vectors_.begin() + static_cast<std::ptrdiff_t>(it->second * dim_));
  } else {
    const auto slot = static_cast<std::uint32_t>(ids_.size());
    ids_.push_back(record_id);
    slot_of_.emplace(record_id, slot);
    vectors_.insert(vectors_.end(), unit_vector.begin(), unit_vector.end());
  }
  built_ = false;
}

bool VectorIndex::contains(const std::string& record_id) const {
  std::shared_lock lock(mutex_);
  return slot_of_.count(record_id) != 0;
}

std::vector<float> VectorIndex::vector_of(const std::string& record_id) const {
  std::shared_lock lock(mutex_);
  auto it = slot_of_.find(record_id);
  if (it == slot_of_.end()) throw Error(ErrorCode::kNotFound, "record '" + record_id + "' not indexed");
  const float* p = data_of(it->second);
  return std::vector<float>(p, p + dim_);
}

std::vector<std::string> VectorIndex::record_ids() const {
  std::shared_lock lock(mutex_);
  return ids_;
}

float VectorIndex::distance(const float* a, const float* b) const {
  float acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  std::size_t i = 0;
  for (; i + 8 <= dim_; i += 8) {
    for (int j = 0; j < 8; ++j) acc[j] += a[i + j] * b[i + j];
  }
  float dot = ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]));
  for (; i < dim_; ++i) dot += a[i] * b[i];
  return 1.0f - dot;
}

void VectorIndex::check_query(std::span<const float> query) const {
  if (query.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "index dim " + std::to_string(dim_) + ", query dim " +
                                                   std::to_string(query.size()));
  }
  if (ids_.empty()) throw Error(ErrorCode::kEmptyIndex, "index is empty");
}

std::vector<VectorIndex::Candidate> VectorIndex::search_layer(const float* query, std::uint32_t entry,
                                                              std::size_t ef, int layer) const {
  auto nearer_first = [](const Candidate& a, const Candidate& b) {
    return closer(b.distance, b.node, a.distance, a.node);
  };
  auto farther_first = [](const Candidate& a, const Candidate& b) {
    return closer(a.distance, a.node, b.distance, b.node);
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(nearer_first)> frontier(nearer_first);
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(farther_first)> best(farther_first);
  std::vector<bool> visited(ids_.size(), false);

  const Candidate start{distance(query, data_of(entry)), entry};
  frontier.push(start);
  best.push(start);
  visited[entry] = true;
  while (!frontier.empty()) {
    const Candidate current = frontier.top();
    if (best.size() >= ef && closer(best.top().distance, best.top().node, current.distance, current.node)) break;
    frontier.pop();
    for (std::uint32_t nb : links_[current.node][static_cast<std::size_t>(layer)]) {
      if (visited[nb]) continue;
      visited[nb] = true;
      const Candidate c{distance(query, data_of(nb)), nb};
      if (best.size() < ef || closer(c.distance, c.node, best.top().distance, best.top().node)) {
        frontier.push(c);
        best.push(c);
        if (best.size() > ef) best.pop();
      }
    }
  }
  std::vector<Candidate> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::uint32_t> VectorIndex::select_neighbors(const float*, std::vector<Candidate> candidates,
                                                         std::size_t limit) const {
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return closer(a.distance, a.node, b.distance, b.node);
  });
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> pruned;
  for (const Candidate& c : candidates) {
    if (kept.size() >= limit) break;
    bool diverse = true;
    for (std::uint32_t r : kept) {
      if (distance(data_of(c.node), data_of(r)) < c.distance) {
        diverse = false;
        break;
      }
    }
    (diverse ? kept : pruned).push_back(c.node);
  }
  // Top up with the closest pruned candidates so sparse regions keep degree.
  for (std::size_t i = 0; i < pruned.size() && kept.size() < limit; ++i) kept.push_back(pruned[i]);
  return kept;
}

void VectorIndex::link_node(std::uint32_t node, int level) {
  const float* q = data_of(node);
  links_[node].assign(static_cast<std::size_t>(level) + 1, {});
  if (max_level_ < 0) {
    entry_point_ = node;
    max_level_ = level;
    return;
  }
  std::uint32_t current = entry_point_;
  for (int layer = max_level_; layer > level; --layer) {
    current = search_layer(q, current, 1, layer).front().node;
  }
  for (int layer = std::min(level, max_level_); layer >= 0; --layer) {
    const auto found = search_layer(q, current, params_.ef_construction, layer);
    const std::size_t cap = layer == 0 ? 2 * params_.m : params_.m;
    auto neighbours = select_neighbors(q, found, params_.m);
    links_[node][static_cast<std::size_t>(layer)] = neighbours;
    for (std::uint32_t nb : neighbours) {
      auto& back = links_[nb][static_cast<std::size_t>(layer)];
      back.push_back(node);
      if (back.size() > cap) {
        std::vector<Candidate> pool;
        pool.reserve(back.size());
        for (std::uint32_t x : back) pool.push_back({distance(data_of(nb), data_of(x)), x});
        back = select_neighbors(data_of(nb), std::move(pool), cap);
      }
    }
    current = found.front().node;
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = node;
  }
}

void VectorIndex::build() {
  std::unique_lock lock(mutex_);
  const std::size_t n = ids_.size();
  levels_.assign(n, 0);
  links_.assign(n, {});
  max_level_ = -1;
  entry_point_ = 0;
  Rng rng(params_.seed);
  const double p_up = 1.0 / static_cast<double>(params_.m);
  for (std::size_t i = 0; i < n; ++i) {
    int level = 0;
    while (level < kMaxLevel && rng.uniform() < p_up) ++level;
    levels_[i] = level;
  }
  for (std::size_t i = 0; i < n; ++i) link_node(static_cast<std::uint32_t>(i), levels_[i]);
  built_ = true;
}

std::vector<ResultEntry> VectorIndex::finalize(std::span<const float> query,
                                               const std::vector<std::uint32_t>& nodes, std::size_t k,
                                               const ExclusionSet* excluded) const {
  std::vector<ResultEntry> out;
  out.reserve(nodes.size());
  for (std::uint32_t node : nodes) {
    const std::string& id = ids_[node];
    if (excluded && excluded->count(id)) continue;
    out.push_back({id, cosine(query, std::span<const float>(data_of(node), dim_)), std::nullopt});
  }
  const std::size_t keep = std::min(k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(), ranks_before);
  out.resize(keep);
  return out;
}

std::vector<ResultEntry> VectorIndex::search_exact(std::span<const float> query, std::size_t k,
                                                   const ExclusionSet* excluded) const {
  std::shared_lock lock(mutex_);
  check_query(query);
  std::vector<std::uint32_t> all(ids_.size());
  for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
  return finalize(query, all, k, excluded);
}

std::vector<ResultEntry> VectorIndex::search_ann(std::span<const float> query, std::size_t k,
                                                 const ExclusionSet* excluded) const {
  std::shared_lock lock(mutex_);
  check_query(query);
  if (!built_) throw Error(ErrorCode::kIndexNotBuilt, "call build() before approximate search");
  std::uint32_t current = entry_point_;
  for (int layer = max_level_; layer > 0; --layer) {
    current = search_layer(query.data(), current, 1, layer).front().node;
  }
  const std::size_t extra = excluded ? excluded->size() : 0;
  const std::size_t ef = std::max(params_.ef_search, k + extra);
  const auto found = search_layer(query.data(), current, ef, 0);
  std::vector<std::uint32_t> nodes;
  nodes.reserve(found.size());
  for (const auto& c : found) nodes.push_back(c.node);
  return finalize(query, nodes, k, excluded);
}

std::vector<ResultEntry> VectorIndex::search_radius(std::span<const float> query,
                                                    double min_similarity) const {
  std::shared_lock lock(mutex_);
  check_query(query);
  std::vector<ResultEntry> out;
  for (std::uint32_t i = 0; i < ids_.size(); ++i) {
    const double s = cosine(query, std::span<const float>(data_of(i), dim_));
    if (s >= min_similarity) out.push_back({ids_[i], s, std::nullopt});
  }
  std::sort(out.begin(), out.end(), ranks_before);
  return out;
}

void VectorIndex::save(const std::string& header_path, const std::string& blob_path) const {
  std::shared_lock lock(mutex_);
  nlohmann::json header = {
      {"dimension", dim_},
      {"count", ids_.size()},
      {"metric", "cosine"},
      {"seed", params_.seed},
      {"structure",
       {{"type", "hnsw"},
        {"m", params_.m},
        {"ef_construction", params_.ef_construction},
        {"ef_search", params_.ef_search},
        {"built", built_},
        {"entry_point", entry_point_},
        {"max_level", max_level_}}},
      {"blob_version", kBlobVersion},
  };
  {
    std::ofstream out(header_path, std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + header_path);
    out << header.dump(2) << '\n';
  }
  std::ofstream out(blob_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + blob_path);
  out.put(static_cast<char>(kBlobVersion));
  put_u32(out, static_cast<std::uint32_t>(dim_));
  put_u64(out, ids_.size());
  for (const auto& id : ids_) {
    put_u32(out, static_cast<std::uint32_t>(id.size()));
    out.write(id.data(), static_cast<std::streamsize>(id.size()));
  }
  for (float f : vectors_) put_f32(out, f);
  if (built_) {
    for (std::size_t node = 0; node < ids_.size(); ++node) {
      put_u32(out, static_cast<std::uint32_t>(levels_[node]));
      for (const auto& layer : links_[node]) {
        put_u32(out, static_cast<std::uint32_t>(layer.size()));
        for (std::uint32_t nb : layer) put_u32(out, nb);
      }
    }
  }
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + blob_path);
}

VectorIndex VectorIndex::load(const std::string& header_path, const std::string& blob_path) {
  nlohmann::json header;
  try {
    std::ifstream hin(header_path);
    if (!hin) throw Error(ErrorCode::kIoError, "cannot read " + header_path);
    header = nlohmann::json::parse(hin);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, header_path + ": " + e.what());
  }
  HnswParams params;
  std::size_t dim = 0, count = 0;
  bool built = false;
  std::uint32_t entry = 0;
  int max_level = -1;
  try {
    dim = header.at("dimension").get<std::size_t>();
    count = header.at("count").get<std::size_t>();
    params.seed = header.at("seed").get<std::uint64_t>();
    const auto& s = header.at("structure");
    params.m = s.at("m").get<std::size_t>();
    params.ef_construction = s.at("ef_construction").get<std::size_t>();
    params.ef_search = s.at("ef_search").get<std::size_t>();
    built = s.at("built").get<bool>();
    entry = s.at("entry_point").get<std::uint32_t>();
    max_level = s.at("max_level").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, header_path + ": " + e.what());
  }

  std::ifstream in(blob_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + blob_path);
  const int version = in.get();
  if (version != kBlobVersion) {
    throw Error(ErrorCode::kParseError, "unsupported index blob version " + std::to_string(version));
  }
  if (get_u32(in) != dim || get_u64(in) != count) {
    throw Error(ErrorCode::kParseError, "index header and blob disagree");
  }
  VectorIndex index(dim, params);
  index.ids_.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in);
    std::string id(len, '\0');
    if (!in.read(id.data(), len)) throw Error(ErrorCode::kParseError, "index blob truncated");
    index.slot_of_.emplace(id, static_cast<std::uint32_t>(i));
    index.ids_.push_back(std::move(id));
  }
  index.vectors_.resize(count * dim);
  for (auto& f : index.vectors_) f = get_f32(in);
  if (built) {
    index.levels_.resize(count);
    index.links_.resize(count);
    for (std::size_t node = 0; node < count; ++node) {
      const int level = static_cast<int>(get_u32(in));
      if (level > kMaxLevel) throw Error(ErrorCode::kParseError, "corrupt node level");
      index.levels_[node] = level;
      index.links_[node].resize(static_cast<std::size_t>(level) + 1);
      for (auto& layer : index.links_[node]) {
        layer.resize(get_u32(in));
        for (auto& nb : layer) {
          nb = get_u32(in);
          if (nb >= count) throw Error(ErrorCode::kParseError, "corrupt neighbour id");
        }
      }
    }
    index.entry_point_ = entry;
    index.max_level_ = max_level;
    index.built_ = true;
  }
  return index;
}

}  // namespace curation

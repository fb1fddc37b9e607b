#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "curation/taxonomy.hpp"
#include "json.hpp"

namespace curation {

// Free text produced by the rewriting client, tied to the caption version it
// was built from. Never replaces the structured attributes.
struct NaturalCaption {
  std::string text;
  std::int64_t source_version = 0;

  friend bool operator==(const NaturalCaption&, const NaturalCaption&) = default;
};

// Immutable value: merges produce a new caption with a higher version.
struct StructuredCaption {
  std::string record_id;
  PrimaryCategory category = PrimaryCategory::kPhotorealistic;
  std::map<std::string, std::string> attributes;
  std::int64_t version = 1;
  std::int64_t updated_at = 0;  // epoch ms
  std::optional<NaturalCaption> natural_caption;
  std::optional<std::string> raw_caption;

  friend bool operator==(const StructuredCaption&, const StructuredCaption&) = default;
};

struct CaptionPatch {
  std::map<std::string, std::string> set;
  std::vector<std::string> remove;
};

// Ordered list of human-readable violations; empty means valid. Unknown keys
// come first (key order), then missing required dimensions and empty
// required texts (schema order).
std::vector<std::string> validate_caption(const StructuredCaption& caption,
                                          const SchemaTable& table = SchemaTable::defaults());

// Applies set, then remove; untouched attributes are preserved verbatim and
// the version increments by one. Throws InvalidPatch (overlapping or
// off-schema keys) or WouldInvalidate (result fails validation).
StructuredCaption merge_caption_update(const StructuredCaption& current, const CaptionPatch& patch,
                                       std::int64_t updated_at,
                                       const SchemaTable& table = SchemaTable::defaults());

struct RewriteRequest {
  std::string record_id;
  std::int64_t source_version = 0;
  std::string category;
  std::vector<std::pair<std::string, std::string>> dimensions;  // schema order
  std::string prompt;

  nlohmann::json to_json() const;
};

// Deterministic prompt payload for the rewriting model. Throws InvalidCaption.
RewriteRequest build_rewrite_request(const StructuredCaption& caption,
                                     const SchemaTable& table = SchemaTable::defaults());

class RewriteClient {
 public:
  virtual ~RewriteClient() = default;
  // Free-text rewrite; throws ProviderUnavailable.
  virtual std::string rewrite(const RewriteRequest& request) const = 0;
};

// Joins the dimension texts in order; useful for tests and offline runs.
class StubRewriteClient final : public RewriteClient {
 public:
  std::string rewrite(const RewriteRequest& request) const override;
};

// POSTs the request JSON and expects {"text": "..."}.
class RemoteRewriteClient final : public RewriteClient {
 public:
  explicit RemoteRewriteClient(std::string url, int timeout_seconds = 30)
      : url_(std::move(url)), timeout_seconds_(timeout_seconds) {}
  std::string rewrite(const RewriteRequest& request) const override;

 private:
  std::string url_;
  int timeout_seconds_;
};

// Stores the rewrite next to the structured caption; the version is
// unchanged because the structured content is unchanged.
StructuredCaption attach_rewrite(const StructuredCaption& caption, const RewriteRequest& request,
                                 std::string text);

nlohmann::json to_json(const StructuredCaption& caption);
StructuredCaption caption_from_json(const nlohmann::json& j);

// In-memory caption store with optimistic versioning. A merge names the
// version it was computed against; a stale version fails with
// VersionConflict and the caller re-reads and retries.
class CaptionStore {
 public:
  explicit CaptionStore(const SchemaTable& table = SchemaTable::defaults()) : table_(&table) {}

  // New record; the caption must validate. Throws Conflict if present.
  void create(const StructuredCaption& caption);
  std::optional<StructuredCaption> get(const std::string& record_id) const;
  StructuredCaption merge(const std::string& record_id, std::int64_t expected_version, const CaptionPatch& patch,
                          std::int64_t updated_at);
  void put_rewrite(const std::string& record_id, std::int64_t expected_version, std::string text);
  std::size_t size() const;

  void save(const std::string& path) const;
  void load(const std::string& path);

 private:
  const SchemaTable* table_;
  mutable std::mutex mutex_;
  std::map<std::string, StructuredCaption> captions_;
};

}  // namespace curation

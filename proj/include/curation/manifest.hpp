#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "curation/taxonomy.hpp"
#include "json.hpp"

namespace curation {

enum class Task { kT2I, kI2I, kT2S, kTI2S };

inline constexpr std::array<Task, 4> kAllTasks = {Task::kT2I, Task::kI2I, Task::kT2S, Task::kTI2S};

std::string_view task_name(Task task);
Task parse_task(std::string_view text);

enum class RecordDecision { kUnscored, kPass, kFail };

std::string_view decision_name(RecordDecision d);

struct ManifestEntry {
  std::string record_id;
  std::string blob_ref;
  Task task = Task::kT2I;
  PrimaryCategory category = PrimaryCategory::kPhotorealistic;
  RecordDecision decision = RecordDecision::kUnscored;
  std::int64_t caption_version = 0;  // 0: no structured caption yet

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

nlohmann::json to_json(const ManifestEntry& entry);
ManifestEntry manifest_entry_from_json(const nlohmann::json& j);

inline constexpr std::string_view kManifestMagic = "#manifest-v1";

// Ordered record listing with provenance metadata carried on the header line.
struct Manifest {
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<ManifestEntry> entries;

  std::size_t size() const { return entries.size(); }
  // Throws Conflict on a repeated record_id.
  void validate_unique() const;

  // "#manifest-v1 <metadata json>" then one JSON object per line.
  std::string serialize() const;
  static Manifest parse(std::string_view text);

  void save(const std::string& path) const;
  static Manifest load(const std::string& path);
};

// Streams entries from a manifest file without holding the corpus in memory.
class ManifestReader {
 public:
  explicit ManifestReader(const std::string& path);
  const nlohmann::json& metadata() const { return metadata_; }
  std::optional<ManifestEntry> next();

 private:
  std::string path_;
  std::ifstream in_;
  nlohmann::json metadata_ = nlohmann::json::object();
  std::size_t line_no_ = 1;
};

class ManifestWriter {
 public:
  ManifestWriter(const std::string& path, const nlohmann::json& metadata);
  void write(const ManifestEntry& entry);

 private:
  std::string path_;
  std::ofstream out_;
};

}  // namespace curation

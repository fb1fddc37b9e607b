#include "curation/manifest.hpp"

#include <set>
#include <sstream>

#include "curation/error.hpp"

namespace curation {

std::string_view task_name(Task task) {
  switch (task) {
    case Task::kT2I: return "T2I";
    case Task::kI2I: return "I2I";
    case Task::kT2S: return "T2S";
    case Task::kTI2S: return "TI2S";
  }
  return "T2I";
}

Task parse_task(std::string_view text) {
  for (auto t : kAllTasks) {
    if (task_name(t) == text) return t;
  }
  throw Error(ErrorCode::kParseError, "unknown task '" + std::string(text) + "'");
}

std::string_view decision_name(RecordDecision d) {
  switch (d) {
    case RecordDecision::kUnscored: return "UNSCORED";
    case RecordDecision::kPass: return "PASS";
    case RecordDecision::kFail: return "FAIL";
  }
  return "UNSCORED";
}

namespace {

RecordDecision parse_decision(std::string_view text) {
  if (text == "UNSCORED") return RecordDecision::kUnscored;
  if (text == "PASS") return RecordDecision::kPass;
  if (text == "FAIL") return RecordDecision::kFail;
  throw Error(ErrorCode::kParseError, "unknown decision '" + std::string(text) + "'");
}

nlohmann::json parse_header(const std::string& line, const std::string& where) {
  if (line.rfind(kManifestMagic, 0) != 0) {
    throw Error(ErrorCode::kParseError, where + ": missing " + std::string(kManifestMagic) + " header");
  }
  const std::string rest = line.substr(kManifestMagic.size());
  if (rest.find_first_not_of(" \t") == std::string::npos) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(rest);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, where + ": header metadata: " + e.what());
  }
}

ManifestEntry parse_line(const std::string& line, const std::string& where) {
  try {
    return manifest_entry_from_json(nlohmann::json::parse(line));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, where + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::kParseError, where + ": " + e.what());
  }
}

}  // namespace

nlohmann::json to_json(const ManifestEntry& e) {
  return {
      {"record_id", e.record_id},
      {"blob_ref", e.blob_ref},
      {"task", task_name(e.task)},
      {"category", category_name(e.category)},
      {"decision", decision_name(e.decision)},
      {"caption_version", e.caption_version},
  };
}

ManifestEntry manifest_entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  e.record_id = j.at("record_id").get<std::string>();
  e.blob_ref = j.value("blob_ref", std::string());
  e.task = parse_task(j.value("task", std::string("T2I")));
  e.category = parse_category(j.value("category", std::string("PHOTOREALISTIC")));
  e.decision = parse_decision(j.value("decision", std::string("UNSCORED")));
  e.caption_version = j.value("caption_version", std::int64_t{0});
  if (e.record_id.empty()) throw Error(ErrorCode::kParseError, "empty record_id");
  return e;
}

void Manifest::validate_unique() const {
  std::set<std::string> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.record_id).second) {
      throw Error(ErrorCode::kConflict, "record_id '" + e.record_id + "' appears twice in manifest");
    }
  }
}

std::string Manifest::serialize() const {
  std::string out(kManifestMagic);
  out += ' ';
  out += metadata.dump();
  out += '\n';
  for (const auto& e : entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

Manifest Manifest::parse(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  Manifest m;
  if (!std::getline(in, line)) throw Error(ErrorCode::kParseError, "empty manifest");
  m.metadata = parse_header(line, "manifest line 1");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    m.entries.push_back(parse_line(line, "manifest line " + std::to_string(line_no)));
  }
  m.validate_unique();
  return m;
}

void Manifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << serialize();
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path);
}

Manifest Manifest::load(const std::string& path) {
  ManifestReader reader(path);
  Manifest m;
  m.metadata = reader.metadata();
  while (auto e = reader.next()) m.entries.push_back(std::move(*e));
  m.validate_unique();
  return m;
}

ManifestReader::ManifestReader(const std::string& path) : path_(path), in_(path) {
  if (!in_) throw Error(ErrorCode::kIoError, "cannot read manifest " + path);
  std::string line;
  if (!std::getline(in_, line)) throw Error(ErrorCode::kParseError, path + ": empty manifest");
  metadata_ = parse_header(line, path + ":1");
}

std::optional<ManifestEntry> ManifestReader::next() {
  std::string line;
  while (std::getline(in_, line)) {
    ++line_no_;
    if (line.empty()) continue;
    return parse_line(line, path_ + ":" + std::to_string(line_no_));
  }
  return std::nullopt;
}

ManifestWriter::ManifestWriter(const std::string& path, const nlohmann::json& metadata)
    : path_(path), out_(path, std::ios::trunc | std::ios::binary) {
  if (!out_) throw Error(ErrorCode::kIoError, "cannot write manifest " + path);
  out_ << kManifestMagic << ' ' << metadata.dump() << '\n';
}

void ManifestWriter::write(const ManifestEntry& entry) {
  out_ << to_json(entry).dump() << '\n';
  if (!out_) throw Error(ErrorCode::kIoError, "short write to " + path_);
}

}  // namespace curation

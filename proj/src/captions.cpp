#include "curation/captions.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "curation/error.hpp"
#include "curation/remote.hpp"
#include "curation/util.hpp"

namespace curation {

std::vector<std::string> validate_caption(const StructuredCaption& caption, const SchemaTable& table) {
  std::vector<std::string> violations;
  const AttributeSchema* schema = nullptr;
  try {
    schema = &table.schema(caption.category);
  } catch (const Error&) {
    violations.push_back("unknown category");
    return violations;
  }
  for (const auto& [key, text] : caption.attributes) {
    if (!schema->allows(key)) {
      violations.push_back("attribute '" + key + "' is not in the " + std::string(category_name(caption.category)) +
                           " schema");
    }
  }
  for (const auto& required : schema->required) {
    auto it = caption.attributes.find(required);
    if (it == caption.attributes.end()) {
      violations.push_back("required attribute '" + required + "' is missing");
    } else if (it->second.empty()) {
      violations.push_back("required attribute '" + required + "' is empty");
    }
  }
  return violations;
}

StructuredCaption merge_caption_update(const StructuredCaption& current, const CaptionPatch& patch,
                                       std::int64_t updated_at, const SchemaTable& table) {
  const AttributeSchema& schema = table.schema(current.category);
  for (const auto& [key, text] : patch.set) {
    if (!schema.allows(key)) throw Error(ErrorCode::kInvalidPatch, "'" + key + "' is not in the schema");
    if (std::find(patch.remove.begin(), patch.remove.end(), key) != patch.remove.end()) {
      throw Error(ErrorCode::kInvalidPatch, "'" + key + "' is both set and removed");
    }
  }
  for (const auto& key : patch.remove) {
    if (!schema.allows(key)) throw Error(ErrorCode::kInvalidPatch, "'" + key + "' is not in the schema");
  }

  StructuredCaption next = current;
  for (const auto& [key, text] : patch.set) next.attributes[key] = text;
  for (const auto& key : patch.remove) next.attributes.erase(key);
  next.version = current.version + 1;
  next.updated_at = updated_at;
  if (auto violations = validate_caption(next, table); !violations.empty()) {
    throw Error(ErrorCode::kWouldInvalidate, violations.front());
  }
  return next;
}

nlohmann::json RewriteRequest::to_json() const {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& [name, text] : dimensions) dims.push_back({{"name", name}, {"text", text}});
  return {{"record_id", record_id},
          {"source_version", source_version},
          {"category", category},
          {"dimensions", dims},
          {"prompt", prompt}};
}

RewriteRequest build_rewrite_request(const StructuredCaption& caption, const SchemaTable& table) {
  if (auto violations = validate_caption(caption, table); !violations.empty()) {
    throw Error(ErrorCode::kInvalidCaption, violations.front());
  }
  const AttributeSchema& schema = table.schema(caption.category);
  RewriteRequest req;
  req.record_id = caption.record_id;
  req.source_version = caption.version;
  req.category = std::string(category_name(caption.category));
  std::string prompt = "Rewrite the structured description of this " + req.category +
                       " image as one fluent natural-language caption. Keep every stated detail and add none.\n";
  for (const auto& dim : schema.dimensions) {
    auto it = caption.attributes.find(dim);
    if (it == caption.attributes.end()) continue;
    req.dimensions.emplace_back(dim, it->second);
    prompt += "- " + dim + ": " + it->second + "\n";
  }
  req.prompt = std::move(prompt);
  return req;
}

std::string StubRewriteClient::rewrite(const RewriteRequest& request) const {
  std::string out;
  for (const auto& [name, text] : request.dimensions) {
    if (!out.empty()) out += "; ";
    out += text;
  }
  return out + ".";
}

std::string RemoteRewriteClient::rewrite(const RewriteRequest& request) const {
  const nlohmann::json response = post_json(url_, request.to_json(), timeout_seconds_);
  if (!response.contains("text") || !response["text"].is_string()) {
    throw Error(ErrorCode::kProviderUnavailable, url_ + ": response lacks 'text'");
  }
  return response["text"].get<std::string>();
}

StructuredCaption attach_rewrite(const StructuredCaption& caption, const RewriteRequest& request,
                                 std::string text) {
  if (request.record_id != caption.record_id || request.source_version != caption.version) {
    throw Error(ErrorCode::kVersionConflict, "rewrite was built from a different caption version");
  }
  StructuredCaption out = caption;
  out.natural_caption = NaturalCaption{std::move(text), request.source_version};
  return out;
}

nlohmann::json to_json(const StructuredCaption& c) {
  nlohmann::json j = {
      {"record_id", c.record_id},
      {"category", category_name(c.category)},
      {"attributes", c.attributes},
      {"version", c.version},
      {"updated_at", format_timestamp(c.updated_at)},
  };
  if (c.natural_caption) {
    j["natural_caption"] = {{"text", c.natural_caption->text}, {"source_version", c.natural_caption->source_version}};
  }
  if (c.raw_caption) j["raw_caption"] = *c.raw_caption;
  return j;
}

StructuredCaption caption_from_json(const nlohmann::json& j) {
  try {
    StructuredCaption c;
    c.record_id = j.at("record_id").get<std::string>();
    c.category = parse_category(j.at("category").get<std::string>());
    c.attributes = j.at("attributes").get<std::map<std::string, std::string>>();
    c.version = j.at("version").get<std::int64_t>();
    c.updated_at = parse_timestamp(j.at("updated_at").get<std::string>());
    if (j.contains("natural_caption") && !j["natural_caption"].is_null()) {
      const auto& n = j["natural_caption"];
      c.natural_caption = NaturalCaption{n.at("text").get<std::string>(), n.at("source_version").get<std::int64_t>()};
    }
    if (j.contains("raw_caption") && !j["raw_caption"].is_null()) c.raw_caption = j["raw_caption"].get<std::string>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("caption: ") + e.what());
  }
}

void CaptionStore::create(const StructuredCaption& caption) {
  if (auto violations = validate_caption(caption, *table_); !violations.empty()) {
    throw Error(ErrorCode::kInvalidCaption, violations.front());
  }
  std::lock_guard lock(mutex_);
  if (!captions_.emplace(caption.record_id, caption).second) {
    throw Error(ErrorCode::kConflict, "caption for '" + caption.record_id + "' already exists");
  }
}

std::optional<StructuredCaption> CaptionStore::get(const std::string& record_id) const {
  std::lock_guard lock(mutex_);
  auto it = captions_.find(record_id);
  if (it == captions_.end()) return std::nullopt;
  return it->second;
}

StructuredCaption CaptionStore::merge(const std::string& record_id, std::int64_t expected_version,
                                      const CaptionPatch& patch, std::int64_t updated_at) {
  std::lock_guard lock(mutex_);
  auto it = captions_.find(record_id);
  if (it == captions_.end()) throw Error(ErrorCode::kNotFound, "no caption for '" + record_id + "'");
  if (it->second.version != expected_version) {
    throw Error(ErrorCode::kVersionConflict, "caption '" + record_id + "' is at version " +
                                                 std::to_string(it->second.version) + ", merge expected " +
                                                 std::to_string(expected_version));
  }
  StructuredCaption next = merge_caption_update(it->second, patch, updated_at, *table_);
  it->second = next;
  return next;
}

void CaptionStore::put_rewrite(const std::string& record_id, std::int64_t expected_version, std::string text) {
  std::lock_guard lock(mutex_);
  auto it = captions_.find(record_id);
  if (it == captions_.end()) throw Error(ErrorCode::kNotFound, "no caption for '" + record_id + "'");
  if (it->second.version != expected_version) {
    throw Error(ErrorCode::kVersionConflict, "rewrite targets a stale caption version");
  }
  it->second.natural_caption = NaturalCaption{std::move(text), expected_version};
}

std::size_t CaptionStore::size() const {
  std::lock_guard lock(mutex_);
  return captions_.size();
}

void CaptionStore::save(const std::string& path) const {
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  for (const auto& [id, c] : captions_) out << to_json(c).dump() << '\n';
}

void CaptionStore::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::map<std::string, StructuredCaption> loaded;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, path + ": " + e.what());
    }
    StructuredCaption c = caption_from_json(j);
    loaded[c.record_id] = std::move(c);
  }
  std::lock_guard lock(mutex_);
  captions_ = std::move(loaded);
}

}  // namespace curation

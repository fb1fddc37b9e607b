#include "curation/service.hpp"

#include <filesystem>
#include <fstream>

#include "curation/error.hpp"
#include "curation/image.hpp"
#include "curation/util.hpp"
#include "httplib.h"

namespace curation {

namespace {

EmbeddingVector seed_from_json(const nlohmann::json& s, const VectorIndex& index, EmbeddingGateway& gateway) {
  if (!s.is_object()) throw Error(ErrorCode::kInvalidQuery, "each seed must be an object");
  if (s.contains("record_id")) {
    const auto id = s["record_id"].get<std::string>();
    if (!index.contains(id)) throw Error(ErrorCode::kInvalidQuery, "seed record '" + id + "' is not indexed");
    EmbeddingVector v;
    v.values = index.vector_of(id);
    v.modality = Modality::kImage;
    v.provider_id = gateway.provider().id();
    return v;
  }
  if (s.contains("text")) {
    try {
      return gateway.embed_text(s["text"].get<std::string>());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kEmptyText) throw Error(ErrorCode::kInvalidQuery, "text seed is empty");
      throw;
    }
  }
  if (s.contains("image_b64")) {
    try {
      return gateway.embed_image(base64_decode(s["image_b64"].get<std::string>()));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kProviderUnavailable) throw;
      throw Error(ErrorCode::kInvalidQuery, std::string("image seed: ") + e.what());
    }
  }
  if (s.contains("vector")) {
    EmbeddingVector v;
    v.values = s["vector"].get<std::vector<float>>();
    v.modality = parse_modality(s.value("modality", std::string("IMAGE")));
    v.provider_id = s.value("provider_id", gateway.provider().id());
    return v;
  }
  throw Error(ErrorCode::kInvalidQuery, "seed needs record_id, text, image_b64 or vector");
}

const char* json_type() { return "application/json"; }

}  // namespace

RetrievalQuery query_from_json(const nlohmann::json& j, const VectorIndex& index, EmbeddingGateway& gateway) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::kInvalidQuery, "query must be an object");
    RetrievalQuery q;
    q.mode = parse_mode(j.value("mode", std::string("IMAGE")));
    for (const auto& s : j.value("seeds", nlohmann::json::array())) q.seeds.push_back(seed_from_json(s, index, gateway));
    q.hybrid_alpha = j.value("hybrid_alpha", q.hybrid_alpha);
    const auto k = j.value("k", static_cast<std::int64_t>(q.k));
    const auto clusters = j.value("diversity_clusters", std::int64_t{0});
    const auto multiplier = j.value("candidate_multiplier", static_cast<std::int64_t>(q.candidate_multiplier));
    if (k < 1 || clusters < 0 || multiplier < 1) {
      throw Error(ErrorCode::kInvalidQuery, "k, diversity_clusters and candidate_multiplier out of range");
    }
    q.k = static_cast<std::size_t>(k);
    q.diversity_clusters = static_cast<std::size_t>(clusters);
    q.candidate_multiplier = static_cast<std::size_t>(multiplier);
    q.exact = j.value("exact", false);
    q.rerank_seed = j.value("rerank_seed", std::uint64_t{0});
    for (const auto& id : j.value("excluded", nlohmann::json::array())) q.excluded.insert(id.get<std::string>());
    validate_query(q);
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidQuery, std::string("query: ") + e.what());
  }
}

std::string_view label_name(Label label) { return label == Label::kPositive ? "POSITIVE" : "NEGATIVE"; }

Label parse_label(std::string_view text) {
  if (text == "POSITIVE") return Label::kPositive;
  if (text == "NEGATIVE") return Label::kNegative;
  throw Error(ErrorCode::kParseError, "label must be POSITIVE or NEGATIVE");
}

nlohmann::json to_json(const AnnotationEvent& e) {
  return {{"session_id", e.session_id},
          {"query_id", e.query_id},
          {"record_id", e.record_id},
          {"label", label_name(e.label)},
          {"created_at", format_timestamp(e.created_at)}};
}

AnnotationEvent annotation_from_json(const nlohmann::json& j) {
  try {
    AnnotationEvent e;
    e.session_id = j.at("session_id").get<std::string>();
    e.query_id = j.at("query_id").get<std::string>();
    e.record_id = j.at("record_id").get<std::string>();
    e.label = parse_label(j.at("label").get<std::string>());
    if (j.contains("created_at") && j["created_at"].is_string()) {
      e.created_at = parse_timestamp(j["created_at"].get<std::string>());
    }
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kParseError, std::string("annotation: ") + ex.what());
  }
}

std::string_view run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::kPending: return "PENDING";
    case RunStatus::kRunning: return "RUNNING";
    case RunStatus::kDone: return "DONE";
    case RunStatus::kFailed: return "FAILED";
  }
  return "PENDING";
}

nlohmann::json to_json(const FilterRun& run) {
  nlohmann::json j = {{"run_id", run.run_id},
                      {"manifest", run.manifest_ref},
                      {"stage", stage_name(run.stage)},
                      {"status", run_status_name(run.status)}};
  if (run.report) j["report"] = to_json(*run.report);
  if (run.error) j["error"] = *run.error;
  return j;
}

HttpResponse error_response(const Error& error) {
  HttpResponse r;
  switch (error.code()) {
    case ErrorCode::kIndexNotBuilt:
    case ErrorCode::kEmptyIndex:
    case ErrorCode::kProviderUnavailable:
      r.status = 503;
      break;
    case ErrorCode::kNotFound:
      r.status = 404;
      break;
    case ErrorCode::kConflict:
    case ErrorCode::kVersionConflict:
      r.status = 409;
      break;
    case ErrorCode::kIoError:
      r.status = 500;
      break;
    default:
      r.status = 400;
      break;
  }
  const std::string what = error.what();
  const std::string name(error_code_name(error.code()));
  const std::string message = what.rfind(name + ": ", 0) == 0 ? what.substr(name.size() + 2) : what;
  r.body = {{"code", name}, {"message", message}};
  return r;
}

ServiceCore::ServiceCore(std::shared_ptr<const VectorIndex> index, std::shared_ptr<EmbeddingGateway> gateway,
                         Manifest corpus, ServiceConfig config)
    : index_(std::move(index)),
      gateway_(std::move(gateway)),
      corpus_(std::move(corpus)),
      config_(std::move(config)),
      resolve_(file_resolver(config_.corpus_root)) {
  validate_profiles(config_.profiles);
  for (std::size_t i = 0; i < corpus_.entries.size(); ++i) corpus_slot_[corpus_.entries[i].record_id] = i;
  worker_ = std::thread([this] { worker_loop(); });
}

ServiceCore::~ServiceCore() {
  {
    std::lock_guard lock(runs_mutex_);
    stopping_ = true;
  }
  runs_cv_.notify_all();
  worker_.join();
}

std::shared_ptr<ServiceCore::Session> ServiceCore::session_for(std::string& session_id, bool create) {
  std::lock_guard lock(sessions_mutex_);
  if (session_id.empty()) {
    if (!create) throw Error(ErrorCode::kNotFound, "session_id is required");
    do {
      session_id = "s-" + std::to_string(next_session_++);
    } while (sessions_.count(session_id));
  }
  auto it = sessions_.find(session_id);
  if (it != sessions_.end()) return it->second;
  if (!create) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  auto s = std::make_shared<Session>();
  s->state.session_id = session_id;
  sessions_.emplace(session_id, s);
  return s;
}

ServiceCore::SearchOutcome ServiceCore::handle_search(std::string session_id, const RetrievalQuery& query) {
  auto session = session_for(session_id, true);
  ResultSet results = execute_query(*index_, query);
  std::lock_guard lock(session->mutex);
  SessionState& st = session->state;
  const std::string query_id = "q-" + std::to_string(st.next_query++);
  st.queries[query_id] = query;
  st.current_query = query;
  return {session_id, query_id, std::move(results)};
}

void ServiceCore::record_annotation(AnnotationEvent event) {
  auto session = session_for(event.session_id, false);
  if (event.created_at == 0) event.created_at = now_ms();
  {
    std::lock_guard lock(session->mutex);
    SessionState& st = session->state;
    if (!st.queries.count(event.query_id)) {
      throw Error(ErrorCode::kNotFound, "unknown query_id '" + event.query_id + "' in session '" + event.session_id + "'");
    }
    st.annotations[{event.query_id, event.record_id}] = event;
    if (event.label == Label::kPositive) {
      st.negatives.erase(event.record_id);
      st.positives.insert(event.record_id);
    } else {
      st.positives.erase(event.record_id);
      st.negatives.insert(event.record_id);
    }
  }
  append_log(event);
}

void ServiceCore::append_log(const AnnotationEvent& event) {
  if (config_.annotation_log.empty()) return;
  std::lock_guard lock(log_mutex_);
  std::ofstream out(config_.annotation_log, std::ios::app);
  if (!out) throw Error(ErrorCode::kIoError, "cannot append to " + config_.annotation_log);
  out << to_json(event).dump() << '\n';
}

RetrievalQuery ServiceCore::refine_query(const std::string& session_id) {
  std::string id = session_id;
  auto session = session_for(id, false);
  std::lock_guard lock(session->mutex);
  const SessionState& st = session->state;
  if (st.positives.empty()) throw Error(ErrorCode::kNoPositives, "session '" + id + "' has no positive annotations");
  RetrievalQuery q = st.current_query.value_or(RetrievalQuery{});
  q.mode = st.positives.size() == 1 ? QueryMode::kImage : QueryMode::kMultiImage;
  q.seeds.clear();
  for (const auto& rid : st.positives) {
    if (!index_->contains(rid)) throw Error(ErrorCode::kNotFound, "positive '" + rid + "' is not indexed");
    EmbeddingVector v;
    v.values = index_->vector_of(rid);
    v.modality = Modality::kImage;
    v.provider_id = gateway_->provider().id();
    q.seeds.push_back(std::move(v));
  }
  q.excluded = st.negatives;
  validate_query(q);
  return q;
}

ServiceCore::SearchOutcome ServiceCore::refine_and_search(const std::string& session_id) {
  return handle_search(session_id, refine_query(session_id));
}

SessionState ServiceCore::session(const std::string& session_id) const {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(sessions_mutex_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->state;
}

std::string ServiceCore::trigger_filter_run(const std::string& manifest_ref, Stage stage) {
  std::lock_guard lock(runs_mutex_);
  for (const auto& [id, run] : runs_) {
    if (run.manifest_ref == manifest_ref && run.stage == stage &&
        (run.status == RunStatus::kPending || run.status == RunStatus::kRunning)) {
      throw Error(ErrorCode::kConflict, "run " + id + " is already active for this manifest and stage");
    }
  }
  FilterRun run;
  run.run_id = "run-" + std::to_string(next_run_++);
  run.manifest_ref = manifest_ref;
  run.stage = stage;
  const std::string id = run.run_id;
  runs_.emplace(id, std::move(run));
  queue_.push_back(id);
  runs_cv_.notify_all();
  return id;
}

void ServiceCore::worker_loop() {
  for (;;) {
    std::string id;
    {
      std::unique_lock lock(runs_mutex_);
      runs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      id = queue_.front();
      queue_.pop_front();
      runs_.at(id).status = RunStatus::kRunning;
    }
    runs_cv_.notify_all();
    execute_run(id);
  }
}

void ServiceCore::execute_run(const std::string& run_id) {
  std::string manifest_ref;
  Stage stage;
  {
    std::lock_guard lock(runs_mutex_);
    manifest_ref = runs_.at(run_id).manifest_ref;
    stage = runs_.at(run_id).stage;
  }
  std::optional<PassReport> report;
  std::optional<std::string> error;
  try {
    std::filesystem::path path(manifest_ref);
    if (path.is_relative() && !config_.corpus_root.empty()) path = std::filesystem::path(config_.corpus_root) / path;
    const Manifest source = Manifest::load(path.string());
    const ThresholdProfile profile = build_threshold_profile(stage, config_.profiles);
    report = run_filter_pass(source, profile, config_.providers, resolve_, config_.filter).report;
  } catch (const std::exception& e) {
    error = e.what();
  }
  {
    std::lock_guard lock(runs_mutex_);
    FilterRun& run = runs_.at(run_id);
    run.report = std::move(report);
    run.error = std::move(error);
    run.status = run.error ? RunStatus::kFailed : RunStatus::kDone;
    if (run.status == RunStatus::kDone) latest_done_ = run_id;
  }
  runs_cv_.notify_all();
}

FilterRun ServiceCore::poll_run(const std::string& run_id) const {
  std::lock_guard lock(runs_mutex_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw Error(ErrorCode::kNotFound, "unknown run '" + run_id + "'");
  return it->second;
}

FilterRun ServiceCore::wait_run(const std::string& run_id) const {
  std::unique_lock lock(runs_mutex_);
  auto it = runs_.find(run_id);
  if (it == runs_.end()) throw Error(ErrorCode::kNotFound, "unknown run '" + run_id + "'");
  runs_cv_.wait(lock, [&] { return it->second.status == RunStatus::kDone || it->second.status == RunStatus::kFailed; });
  return it->second;
}

nlohmann::json ServiceCore::stats() const {
  nlohmann::json j = {{"index", {{"size", index_->size()}, {"built", index_->built()}, {"dimension", index_->dim()}}},
                      {"corpus_size", corpus_.size()}};
  {
    std::lock_guard lock(sessions_mutex_);
    j["sessions"] = sessions_.size();
  }
  std::lock_guard lock(runs_mutex_);
  j["runs"] = runs_.size();
  nlohmann::json hist = nlohmann::json::object();
  if (latest_done_) {
    const FilterRun& run = runs_.at(*latest_done_);
    j["source_run"] = run.run_id;
    j["stage"] = stage_name(run.stage);
    j["profile"] = to_json(run.report->profile);
    for (const auto& [name, h] : run.report->score_histograms) hist[name] = to_json(h);
  }
  j["histograms"] = hist;
  return j;
}

Bytes ServiceCore::thumbnail(const std::string& record_id) const {
  auto it = corpus_slot_.find(record_id);
  if (it == corpus_slot_.end()) throw Error(ErrorCode::kNotFound, "unknown record '" + record_id + "'");
  const Bytes blob = resolve_(corpus_.entries[it->second]);
  const PixelBuffer small = downscale(to_8bit(decode_pixels(blob)), config_.thumbnail_side);
  return encode_jpeg(small, config_.thumbnail_quality);
}

namespace {

template <typename F>
HttpResponse guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return error_response(e);
  } catch (const nlohmann::json::exception& e) {
    return error_response(Error(ErrorCode::kParseError, e.what()));
  }
}

HttpResponse ok(nlohmann::json body, int status = 200) {
  HttpResponse r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

nlohmann::json outcome_json(const ServiceCore::SearchOutcome& o) {
  nlohmann::json j = to_json(o.results);
  j["session_id"] = o.session_id;
  j["query_id"] = o.query_id;
  return j;
}

}  // namespace

HttpResponse ServiceCore::post_search(const nlohmann::json& body) {
  return guarded([&] {
    const nlohmann::json& qj = body.contains("query") ? body["query"] : body;
    std::string session_id = body.value("session_id", std::string());
    const RetrievalQuery query = query_from_json(qj, *index_, *gateway_);
    if (query.mode != QueryMode::kBatch) return ok(outcome_json(handle_search(session_id, query)));

    auto session = session_for(session_id, true);
    const auto expanded = expand_batch(query);
    nlohmann::json batch = nlohmann::json::array();
    for (auto& item : batch_search(*index_, expanded)) {
      if (auto* rs = std::get_if<ResultSet>(&item)) {
        batch.push_back(to_json(*rs));
      } else {
        batch.push_back(error_response(std::get<Error>(item)).body);
      }
    }
    std::lock_guard lock(session->mutex);
    const std::string query_id = "q-" + std::to_string(session->state.next_query++);
    session->state.queries[query_id] = query;
    session->state.current_query = query;
    return ok({{"session_id", session_id}, {"query_id", query_id}, {"batch", batch}});
  });
}

HttpResponse ServiceCore::post_annotation(const nlohmann::json& body) {
  return guarded([&] {
    AnnotationEvent e = annotation_from_json(body);
    record_annotation(e);
    const SessionState st = session(e.session_id);
    return ok({{"ok", true},
               {"session_id", e.session_id},
               {"positives", st.positives},
               {"negatives", st.negatives}});
  });
}

HttpResponse ServiceCore::post_refine(const std::string& session_id, const nlohmann::json& body) {
  return guarded([&] {
    RetrievalQuery q = refine_query(session_id);
    if (body.is_object()) {
      if (body.contains("k")) q.k = body["k"].get<std::size_t>();
      if (body.contains("diversity_clusters")) q.diversity_clusters = body["diversity_clusters"].get<std::size_t>();
      if (body.contains("exact")) q.exact = body["exact"].get<bool>();
      validate_query(q);
    }
    const SearchOutcome o = handle_search(session_id, q);
    nlohmann::json j = outcome_json(o);
    j["query_vector"] = query_vector(q).values;
    return ok(j);
  });
}

HttpResponse ServiceCore::post_filter_run(const nlohmann::json& body) {
  return guarded([&] {
    const std::string manifest = body.at("manifest").get<std::string>();
    const Stage stage = parse_stage(body.value("stage", std::string("PT")));
    const std::string id = trigger_filter_run(manifest, stage);
    return ok(to_json(poll_run(id)), 202);
  });
}

HttpResponse ServiceCore::get_filter_run(const std::string& run_id) const {
  return guarded([&] { return ok(to_json(poll_run(run_id))); });
}

HttpResponse ServiceCore::get_stats() const {
  return guarded([&] { return ok(stats()); });
}

HttpResponse ServiceCore::get_thumbnail(const std::string& record_id) const {
  return guarded([&] {
    const Bytes jpeg = thumbnail(record_id);
    HttpResponse r;
    r.content_type = "image/jpeg";
    r.raw.assign(jpeg.begin(), jpeg.end());
    return r;
  });
}

void mount_routes(httplib::Server& server, ServiceCore& core) {
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.payload(), r.content_type);
  };
  auto parse = [](const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    return nlohmann::json::parse(req.body);
  };
  auto with_body = [send, parse](auto handler) {
    return [send, parse, handler](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body;
      try {
        body = parse(req);
      } catch (const nlohmann::json::exception& e) {
        send(res, error_response(Error(ErrorCode::kParseError, e.what())));
        return;
      }
      send(res, handler(req, body));
    };
  };

  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Post("/v1/search", with_body([&core](const httplib::Request&, const nlohmann::json& b) {
                return core.post_search(b);
              }));
  server.Post("/v1/annotations", with_body([&core](const httplib::Request&, const nlohmann::json& b) {
                return core.post_annotation(b);
              }));
  server.Post(R"(/v1/sessions/([^/]+)/refine)", with_body([&core](const httplib::Request& req, const nlohmann::json& b) {
                return core.post_refine(req.matches[1], b);
              }));
  server.Post("/v1/filter-runs", with_body([&core](const httplib::Request&, const nlohmann::json& b) {
                return core.post_filter_run(b);
              }));
  server.Get(R"(/v1/filter-runs/([^/]+))", [&core, send](const httplib::Request& req, httplib::Response& res) {
    send(res, core.get_filter_run(req.matches[1]));
  });
  server.Get("/v1/stats", [&core, send](const httplib::Request&, httplib::Response& res) {
    send(res, core.get_stats());
  });
  server.Get(R"(/v1/records/([^/]+)/thumbnail)", [&core, send](const httplib::Request& req, httplib::Response& res) {
    send(res, core.get_thumbnail(req.matches[1]));
  });
  server.set_exception_handler([json_type = json_type()](const httplib::Request&, httplib::Response& res,
                                                        std::exception_ptr ep) {
    std::string message = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      message = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"code", "Internal"}, {"message", message}}.dump(), json_type);
  });
}

}  // namespace curation

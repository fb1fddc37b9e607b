#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "curation/embedding.hpp"
#include "curation/manifest.hpp"
#include "curation/pipeline.hpp"
#include "curation/profiles.hpp"
#include "curation/retrieval.hpp"
#include "curation/vector_index.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace curation {

// Turns the JSON form of a query into a RetrievalQuery. Each seed is one of
// {"record_id"}, {"text"}, {"image_b64"} or {"vector", "modality"}.
// Throws InvalidQuery on malformed input.
RetrievalQuery query_from_json(const nlohmann::json& j, const VectorIndex& index, EmbeddingGateway& gateway);

enum class Label { kPositive, kNegative };

std::string_view label_name(Label label);
Label parse_label(std::string_view text);

struct AnnotationEvent {
  std::string session_id;
  std::string query_id;
  std::string record_id;
  Label label = Label::kPositive;
  std::int64_t created_at = 0;  // epoch ms
};

nlohmann::json to_json(const AnnotationEvent& event);
AnnotationEvent annotation_from_json(const nlohmann::json& j);

struct SessionState {
  std::string session_id;
  std::optional<RetrievalQuery> current_query;
  std::set<std::string> positives;
  std::set<std::string> negatives;
  std::map<std::string, RetrievalQuery> queries;  // by query_id
  std::map<std::tuple<std::string, std::string>, AnnotationEvent> annotations;  // (query_id, record_id)
  std::uint64_t next_query = 1;
};

enum class RunStatus { kPending, kRunning, kDone, kFailed };

std::string_view run_status_name(RunStatus status);

struct FilterRun {
  std::string run_id;
  std::string manifest_ref;
  Stage stage = Stage::kPT;
  RunStatus status = RunStatus::kPending;
  std::optional<PassReport> report;
  std::optional<std::string> error;
};

nlohmann::json to_json(const FilterRun& run);

struct ServiceConfig {
  std::string corpus_root;      // blob_ref and manifest paths resolve here
  std::string annotation_log;   // JSON lines; empty disables
  ProfileSet profiles = default_profile_set();
  ScorerProviderSet providers = stub_providers();
  FilterOptions filter;
  std::uint32_t thumbnail_side = 256;
  int thumbnail_quality = 85;
};

struct HttpResponse {
  int status = 200;
  nlohmann::json body = nlohmann::json::object();
  std::string content_type = "application/json";
  std::string raw;  // used instead of body for binary payloads

  std::string payload() const { return raw.empty() && content_type == "application/json" ? body.dump() : raw; }
};

// Maps a library error to an HTTP status with a {code, message} body.
HttpResponse error_response(const Error& error);

// Transport-independent service state. The HTTP server is a thin adapter.
class ServiceCore {
 public:
  ServiceCore(std::shared_ptr<const VectorIndex> index, std::shared_ptr<EmbeddingGateway> gateway, Manifest corpus,
              ServiceConfig config = {});
  ~ServiceCore();
  ServiceCore(const ServiceCore&) = delete;
  ServiceCore& operator=(const ServiceCore&) = delete;

  struct SearchOutcome {
    std::string session_id;
    std::string query_id;
    ResultSet results;
  };

  // Empty session_id creates a fresh session; an unknown one is created.
  SearchOutcome handle_search(std::string session_id, const RetrievalQuery& query);
  // Throws NotFound for an unknown session or query_id.
  void record_annotation(AnnotationEvent event);
  // MULTI_IMAGE over all positives (IMAGE with one) excluding every negative.
  // Throws NotFound or NoPositives.
  RetrievalQuery refine_query(const std::string& session_id);
  SearchOutcome refine_and_search(const std::string& session_id);
  SessionState session(const std::string& session_id) const;

  // Throws Conflict while the same (manifest, stage) is pending or running.
  std::string trigger_filter_run(const std::string& manifest_ref, Stage stage);
  FilterRun poll_run(const std::string& run_id) const;
  // Blocks until the run leaves PENDING/RUNNING.
  FilterRun wait_run(const std::string& run_id) const;

  nlohmann::json stats() const;
  Bytes thumbnail(const std::string& record_id) const;

  // HTTP-shaped handlers.
  HttpResponse post_search(const nlohmann::json& body);
  HttpResponse post_annotation(const nlohmann::json& body);
  HttpResponse post_refine(const std::string& session_id, const nlohmann::json& body);
  HttpResponse post_filter_run(const nlohmann::json& body);
  HttpResponse get_filter_run(const std::string& run_id) const;
  HttpResponse get_stats() const;
  HttpResponse get_thumbnail(const std::string& record_id) const;

 private:
  struct Session {
    std::mutex mutex;
    SessionState state;
  };

  std::shared_ptr<Session> session_for(std::string& session_id, bool create);
  void worker_loop();
  void execute_run(const std::string& run_id);
  void append_log(const AnnotationEvent& event);

  std::shared_ptr<const VectorIndex> index_;
  std::shared_ptr<EmbeddingGateway> gateway_;
  Manifest corpus_;
  std::map<std::string, std::size_t> corpus_slot_;
  ServiceConfig config_;
  BlobResolver resolve_;

  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_session_ = 1;

  std::mutex log_mutex_;

  mutable std::mutex runs_mutex_;
  mutable std::condition_variable runs_cv_;
  std::map<std::string, FilterRun> runs_;
  std::deque<std::string> queue_;
  std::uint64_t next_run_ = 1;
  std::optional<std::string> latest_done_;
  bool stopping_ = false;
  std::thread worker_;
};

// Registers the /v1 routes on an httplib server.
void mount_routes(httplib::Server& server, ServiceCore& core);

}  // namespace curation

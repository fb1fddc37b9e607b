#include "curation/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "curation/captions.hpp"
#include "curation/error.hpp"
#include "curation/image.hpp"
#include "curation/manifest.hpp"
#include "curation/pipeline.hpp"
#include "curation/retrieval.hpp"
#include "curation/service.hpp"
#include "curation/util.hpp"
#include "curation/vector_index.hpp"
#include "httplib.h"

namespace fs = std::filesystem;

namespace curation {

CliConfig config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
    CliConfig c;
    c.corpus_root = j.value("corpus_root", c.corpus_root);
    c.index_path = j.value("index_path", c.index_path);
    c.cache_path = j.value("cache_path", c.cache_path);
    if (j.contains("providers")) {
      const auto& p = j["providers"];
      c.providers.embedding_url = p.value("embedding_url", std::string());
      c.providers.embedding_dim = p.value("embedding_dim", c.providers.embedding_dim);
      c.providers.ai_url = p.value("ai_url", std::string());
      c.providers.watermark_url = p.value("watermark_url", std::string());
      c.providers.greasy_url = p.value("greasy_url", std::string());
      c.providers.rewrite_url = p.value("rewrite_url", std::string());
    }
    if (j.contains("profiles")) c.profiles = profile_set_from_json(j["profiles"]);
    validate_profiles(c.profiles);
    if (j.contains("sampling")) c.sampling = sampling_config_from_json(j["sampling"]);
    if (j.contains("dedup")) {
      c.dedup_threshold = j["dedup"].value("threshold", c.dedup_threshold);
      if (j["dedup"].contains("policy")) c.dedup_policy = parse_policy(j["dedup"]["policy"].get<std::string>());
    }
    c.seed = j.value("seed", c.seed);
    if (!j.contains("sampling") || !j["sampling"].contains("seed")) c.sampling.seed = c.seed;
    if (j.contains("service")) {
      c.host = j["service"].value("host", c.host);
      c.port = j["service"].value("port", c.port);
      c.annotation_log = j["service"].value("annotation_log", c.annotation_log);
    }
    if (c.dedup_threshold < -1.0 || c.dedup_threshold > 1.0) {
      throw Error(ErrorCode::kInvalidConfig, "dedup threshold must lie in [-1, 1]");
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  }
}

CliConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot read config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  CliConfig c = config_from_json(j);
  // Relative paths in a config file are relative to the file itself.
  const fs::path base = fs::path(path).parent_path();
  for (std::string* p : {&c.corpus_root, &c.index_path, &c.cache_path, &c.annotation_log}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = (base / *p).string();
  }
  if (!c.corpus_root.empty() && !fs::is_directory(c.corpus_root)) {
    throw Error(ErrorCode::kInvalidConfig, "corpus_root '" + c.corpus_root + "' is not a directory");
  }
  return c;
}

ScorerProviderSet make_scorers(const ProviderEndpoints& e) {
  ScorerProviderSet s = stub_providers();
  if (!e.ai_url.empty()) s.ai = std::make_shared<RemoteScorer>("ai", e.ai_url);
  if (!e.watermark_url.empty()) s.watermark = std::make_shared<RemoteScorer>("watermark", e.watermark_url);
  if (!e.greasy_url.empty()) s.greasy = std::make_shared<RemoteScorer>("greasy", e.greasy_url);
  return s;
}

std::shared_ptr<const EmbeddingProvider> make_embedder(const ProviderEndpoints& e) {
  if (e.embedding_url.empty()) return std::make_shared<StubEmbeddingProvider>(e.embedding_dim);
  return std::make_shared<RemoteEmbeddingProvider>(e.embedding_url, e.embedding_dim);
}

LoadedProfiles load_threshold_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot read threshold profile " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path + ": " + e.what());
  }
  LoadedProfiles out;
  if (j.is_object() && j.contains("stage")) {
    out.single = profile_from_json(j);
  } else {
    out.set = profile_set_from_json(j);
    validate_profiles(*out.set);
  }
  return out;
}

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string manifest;
  std::string stage;
  std::size_t n = 0;
  std::optional<std::uint64_t> seed;
  std::size_t k = 10;
  std::string mode = "image";
  std::string threshold_profile;
  std::string out;
  std::string input;
  std::string task = "T2I";
  std::string category = "PHOTOREALISTIC";
  std::string report;
  std::string groups;
  std::optional<double> threshold;
  std::string policy;
  std::string index;
  std::vector<std::string> seeds;
  std::vector<std::string> texts;
  double alpha = 0.5;
  std::size_t clusters = 0;
  bool exact = false;
  std::vector<std::string> exclude;
  bool strict = false;
  std::string captions;
  bool passed_only = false;
  std::string host;
  std::optional<int> port;
  std::size_t threads = 0;
};

struct Context {
  CliConfig config;
  Options opt;
  std::ostream& out;
  std::ostream& err;
};

void emit(Context& ctx, const std::string& text) {
  if (ctx.opt.out.empty()) {
    ctx.out << text;
    return;
  }
  std::ofstream f(ctx.opt.out, std::ios::trunc | std::ios::binary);
  if (!f) throw Error(ErrorCode::kIoError, "cannot write " + ctx.opt.out);
  f << text;
}

Manifest read_manifest(const Context& ctx) {
  if (ctx.opt.manifest.empty()) throw UsageError("--manifest is required");
  return Manifest::load(ctx.opt.manifest);
}

std::string corpus_root(const Context& ctx) {
  if (!ctx.config.corpus_root.empty()) return ctx.config.corpus_root;
  if (!ctx.opt.manifest.empty()) return fs::path(ctx.opt.manifest).parent_path().string();
  return {};
}

Stage stage_of(const Context& ctx) {
  if (ctx.opt.stage.empty()) return Stage::kPT;
  try {
    return parse_stage(ctx.opt.stage);
  } catch (const Error&) {
    throw UsageError("--stage must be pt, ct or sft");
  }
}

ThresholdProfile resolve_profile(Context& ctx) {
  if (!ctx.opt.threshold_profile.empty()) {
    LoadedProfiles loaded = load_threshold_profile(ctx.opt.threshold_profile);
    if (loaded.single) {
      if (!ctx.opt.stage.empty() && stage_of(ctx) != loaded.single->stage) {
        throw UsageError("--stage disagrees with the stage of the supplied threshold profile");
      }
      return *loaded.single;
    }
    ctx.config.profiles = *loaded.set;
  }
  return build_threshold_profile(stage_of(ctx), ctx.config.profiles);
}

std::shared_ptr<EmbeddingGateway> make_gateway(const Context& ctx) {
  auto cache = std::make_shared<EmbeddingCache>();
  if (!ctx.config.cache_path.empty() && fs::exists(ctx.config.cache_path)) {
    cache = std::make_shared<EmbeddingCache>(EmbeddingCache::load(ctx.config.cache_path));
  }
  return std::make_shared<EmbeddingGateway>(make_embedder(ctx.config.providers), cache);
}

void save_cache(const Context& ctx, EmbeddingGateway& gateway) {
  if (!ctx.config.cache_path.empty()) gateway.cache().save(ctx.config.cache_path);
}

std::string index_base(const Context& ctx) {
  const std::string base = ctx.opt.index.empty() ? ctx.config.index_path : ctx.opt.index;
  if (base.empty()) throw UsageError("an index path is required (--index or index_path in the config)");
  return base;
}

std::uint64_t seed_of(const Context& ctx) { return ctx.opt.seed.value_or(ctx.config.seed); }

FilterOptions filter_options(const Context& ctx) {
  FilterOptions f;
  f.seed = seed_of(ctx);
  f.threads = ctx.opt.threads;
  return f;
}

std::map<std::string, EmbeddingVector> embed_manifest(const Manifest& m, EmbeddingGateway& gateway,
                                                       const BlobResolver& resolve, std::ostream& err) {
  std::map<std::string, EmbeddingVector> vectors;
  for (const auto& e : m.entries) {
    try {
      vectors.emplace(e.record_id, gateway.embed_image(resolve(e)));
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::kProviderUnavailable) throw;
      err << "skipping " << e.record_id << ": " << ex.what() << '\n';
    }
  }
  return vectors;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".webp";
}

int cmd_ingest(Context& ctx) {
  const std::string root = ctx.opt.input.empty() ? ctx.config.corpus_root : ctx.opt.input;
  if (root.empty()) throw UsageError("--input is required when the config has no corpus_root");
  if (!fs::is_directory(root)) throw Error(ErrorCode::kIoError, "'" + root + "' is not a directory");
  Task task;
  PrimaryCategory category;
  try {
    task = parse_task(ctx.opt.task);
    category = parse_category(ctx.opt.category);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::vector<fs::path> files;
  for (const auto& de : fs::recursive_directory_iterator(root)) {
    if (de.is_regular_file() && is_image_file(de.path())) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  Manifest m;
  m.metadata = {{"source", "ingest"}, {"corpus_root", root}};
  std::size_t skipped = 0;
  for (const auto& f : files) {
    try {
      (void)decode_metadata(read_file(f.string()), DecodeOptions{true});
    } catch (const Error& e) {
      ++skipped;
      ctx.err << "skipping " << f.string() << ": " << e.what() << '\n';
      continue;
    }
    ManifestEntry e;
    e.blob_ref = fs::relative(f, root).generic_string();
    e.record_id = e.blob_ref;
    e.task = task;
    e.category = category;
    m.entries.push_back(std::move(e));
  }
  emit(ctx, m.serialize());
  ctx.err << "ingested " << m.size() << " records, skipped " << skipped << '\n';
  return 0;
}

int cmd_score(Context& ctx) {
  const Manifest m = read_manifest(ctx);
  const ThresholdProfile profile = resolve_profile(ctx);
  const FilterResult r = run_filter_pass(m, profile, make_scorers(ctx.config.providers),
                                         file_resolver(corpus_root(ctx)), filter_options(ctx));
  emit(ctx, to_json(r.report).dump(2) + "\n");
  return 0;
}

int cmd_filter(Context& ctx) {
  const Manifest m = read_manifest(ctx);
  const ThresholdProfile profile = resolve_profile(ctx);
  const FilterResult r = run_filter_pass(m, profile, make_scorers(ctx.config.providers),
                                         file_resolver(corpus_root(ctx)), filter_options(ctx));
  emit(ctx, r.filtered.serialize());
  if (!ctx.opt.report.empty()) {
    std::ofstream f(ctx.opt.report, std::ios::trunc);
    if (!f) throw Error(ErrorCode::kIoError, "cannot write " + ctx.opt.report);
    f << to_json(r.report).dump(2) << '\n';
  }
  ctx.err << "passed " << r.report.passed << " of " << r.report.total << " (" << r.report.errored
          << " unreadable)\n";
  return 0;
}

int cmd_dedup(Context& ctx) {
  const Manifest m = read_manifest(ctx);
  if (ctx.opt.threshold) ctx.config.dedup_threshold = *ctx.opt.threshold;
  if (!ctx.opt.policy.empty()) {
    try {
      ctx.config.dedup_policy = parse_policy(ctx.opt.policy);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
  }
  auto gateway = make_gateway(ctx);
  const auto vectors = embed_manifest(m, *gateway, file_resolver(corpus_root(ctx)), ctx.err);
  const auto groups = find_near_duplicates(vectors, ctx.config.dedup_threshold);
  Manifest deduped = dedup_manifest(m, groups, ctx.config.dedup_policy);
  deduped.metadata["dedup"] = {{"threshold", ctx.config.dedup_threshold},
                               {"policy", policy_name(ctx.config.dedup_policy)},
                               {"groups", groups.size()}};
  if (!ctx.opt.groups.empty()) save_groups(ctx.opt.groups, groups);
  save_cache(ctx, *gateway);
  emit(ctx, deduped.serialize());
  ctx.err << groups.size() << " groups, " << m.size() - deduped.size() << " records removed\n";
  return 0;
}

int cmd_index_build(Context& ctx) {
  const Manifest m = read_manifest(ctx);
  const std::string base = index_base(ctx);
  auto gateway = make_gateway(ctx);
  const auto vectors = embed_manifest(m, *gateway, file_resolver(corpus_root(ctx)), ctx.err);
  VectorIndex index(gateway->dim());
  for (const auto& [id, v] : vectors) index.insert(id, v);
  if (index.size() > 0) index.build();
  index.save(base + ".json", base + ".bin");
  save_cache(ctx, *gateway);
  ctx.out << "indexed " << index.size() << " records into " << base << ".{json,bin}\n";
  return 0;
}

int cmd_search(Context& ctx) {
  const std::string base = index_base(ctx);
  const VectorIndex index = VectorIndex::load(base + ".json", base + ".bin");
  auto gateway = make_gateway(ctx);
  RetrievalQuery q;
  try {
    q.mode = parse_mode(ctx.opt.mode);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  for (const auto& s : ctx.opt.seeds) {
    if (fs::is_regular_file(s)) {
      q.seeds.push_back(gateway->embed_image(read_file(s)));
    } else if (index.contains(s)) {
      EmbeddingVector v;
      v.values = index.vector_of(s);
      v.modality = Modality::kImage;
      v.provider_id = gateway->provider().id();
      q.seeds.push_back(std::move(v));
    } else {
      throw UsageError("seed '" + s + "' is neither a file nor an indexed record");
    }
  }
  for (const auto& t : ctx.opt.texts) q.seeds.push_back(gateway->embed_text(t));
  q.hybrid_alpha = ctx.opt.alpha;
  q.k = ctx.opt.k;
  q.diversity_clusters = ctx.opt.clusters;
  q.exact = ctx.opt.exact;
  q.rerank_seed = seed_of(ctx);
  q.excluded.insert(ctx.opt.exclude.begin(), ctx.opt.exclude.end());
  try {
    validate_query(q);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (q.mode == QueryMode::kBatch) {
    nlohmann::json batch = nlohmann::json::array();
    for (auto& item : batch_search(index, expand_batch(q))) {
      if (auto* rs = std::get_if<ResultSet>(&item)) {
        batch.push_back(to_json(*rs));
      } else {
        batch.push_back(error_response(std::get<Error>(item)).body);
      }
    }
    emit(ctx, batch.dump(2) + "\n");
  } else {
    emit(ctx, to_json(execute_query(index, q)).dump(2) + "\n");
  }
  save_cache(ctx, *gateway);
  return 0;
}

SamplingPlan plan_for(Context& ctx, const Manifest& m) {
  SamplingConfig cfg = ctx.config.sampling;
  if (ctx.opt.seed) cfg.seed = *ctx.opt.seed;
  if (ctx.opt.strict) cfg.strict = true;
  return build_sampling_plan(stage_of(ctx), category_counts(m), cfg);
}

int cmd_plan(Context& ctx) {
  const Manifest m = read_manifest(ctx);
  emit(ctx, to_json(plan_for(ctx, m)).dump(2) + "\n");
  return 0;
}

int cmd_sample(Context& ctx) {
  if (ctx.opt.n == 0) throw UsageError("--n must be at least 1");
  const Manifest m = read_manifest(ctx);
  const SampleResult r = sample_manifest(plan_for(ctx, m), m, ctx.opt.n);
  emit(ctx, r.manifest.serialize());
  for (const auto& s : r.shortfalls) ctx.err << "shortfall " << to_json(s).dump() << '\n';
  return 0;
}

int cmd_export(Context& ctx) {
  if (ctx.opt.manifest.empty()) throw UsageError("--manifest is required");
  if (ctx.opt.out.empty()) throw UsageError("--out is required");
  CaptionStore captions;
  if (!ctx.opt.captions.empty()) captions.load(ctx.opt.captions);
  ManifestReader reader(ctx.opt.manifest);
  nlohmann::json meta = reader.metadata();
  meta["exported"] = true;
  ManifestWriter writer(ctx.opt.out, meta);
  std::size_t written = 0;
  while (auto e = reader.next()) {
    if (ctx.opt.passed_only && e->decision != RecordDecision::kPass) continue;
    if (auto c = captions.get(e->record_id)) e->caption_version = c->version;
    writer.write(*e);
    ++written;
  }
  ctx.err << "exported " << written << " records\n";
  return 0;
}

int cmd_serve(Context& ctx) {
  const std::string base = index_base(ctx);
  auto index = std::make_shared<VectorIndex>(VectorIndex::load(base + ".json", base + ".bin"));
  Manifest corpus = ctx.opt.manifest.empty() ? Manifest{} : Manifest::load(ctx.opt.manifest);
  ServiceConfig sc;
  sc.corpus_root = corpus_root(ctx);
  sc.annotation_log = ctx.config.annotation_log;
  sc.profiles = ctx.config.profiles;
  sc.providers = make_scorers(ctx.config.providers);
  sc.filter = filter_options(ctx);
  ServiceCore core(index, make_gateway(ctx), std::move(corpus), sc);
  httplib::Server server;
  mount_routes(server, core);
  const std::string host = ctx.opt.host.empty() ? ctx.config.host : ctx.opt.host;
  const int port = ctx.opt.port.value_or(ctx.config.port);
  ctx.out << "listening on " << host << ":" << port << std::endl;
  if (!server.listen(host, port)) throw Error(ErrorCode::kIoError, "cannot listen on " + host + ":" + std::to_string(port));
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset curation toolkit: scoring, dedup, retrieval, sampling and serving", "curation"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("--config", opt.config, "JSON config file (falls back to $CURATION_CONFIG)");

  auto add_manifest = [&](CLI::App* c) { c->add_option("--manifest", opt.manifest, "input manifest (JSON lines)"); };
  auto add_stage = [&](CLI::App* c) { c->add_option("--stage", opt.stage, "pt | ct | sft"); };
  auto add_out = [&](CLI::App* c) { c->add_option("--out", opt.out, "output path (default stdout)"); };
  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", opt.seed, "random seed (overrides config)"); };
  auto add_profile = [&](CLI::App* c) {
    c->add_option("--threshold-profile", opt.threshold_profile, "profile JSON: one stage or all three");
  };
  auto add_threads = [&](CLI::App* c) { c->add_option("--threads", opt.threads, "scoring threads (0: all cores)"); };
  auto add_index = [&](CLI::App* c) { c->add_option("--index", opt.index, "index path prefix"); };

  auto* ingest = app.add_subcommand("ingest", "scan a directory of images into a manifest");
  ingest->add_option("--input", opt.input, "image directory (default corpus_root)");
  ingest->add_option("--task", opt.task, "task tag for every record");
  ingest->add_option("--category", opt.category, "category for every record");
  add_out(ingest);

  auto* score = app.add_subcommand("score", "score every record and print the pass report");
  add_manifest(score), add_stage(score), add_profile(score), add_out(score), add_seed(score), add_threads(score);
  auto* filter = app.add_subcommand("filter", "drop records that fail the stage profile");
  add_manifest(filter), add_stage(filter), add_profile(filter), add_out(filter), add_seed(filter), add_threads(filter);
  filter->add_option("--report", opt.report, "write the pass report here");

  auto* dedup = app.add_subcommand("dedup", "remove near-duplicate records");
  add_manifest(dedup), add_out(dedup);
  dedup->add_option("--threshold", opt.threshold, "cosine threshold");
  dedup->add_option("--policy", opt.policy, "KEEP_REPRESENTATIVE | DROP_ALL_DUPES");
  dedup->add_option("--groups", opt.groups, "write duplicate groups (JSON lines) here");

  auto* index_build = app.add_subcommand("index-build", "embed a manifest and build the vector index");
  add_manifest(index_build), add_index(index_build);

  auto* search = app.add_subcommand("search", "query the vector index");
  add_index(search), add_out(search), add_seed(search);
  search->add_option("--mode", opt.mode, "image | multi | text | hybrid | batch");
  search->add_option("--seeds", opt.seeds, "image files or record ids")->delimiter(',');
  search->add_option("--text", opt.texts, "text seed (repeatable)");
  search->add_option("--alpha", opt.alpha, "hybrid image weight");
  search->add_option("-k,--k", opt.k, "result count");
  search->add_option("--clusters", opt.clusters, "diversity clusters (0: off)");
  search->add_flag("--exact", opt.exact, "full scan instead of the graph");
  search->add_option("--exclude", opt.exclude, "record ids to exclude")->delimiter(',');

  auto* plan = app.add_subcommand("plan", "print the sampling plan for a manifest");
  add_manifest(plan), add_stage(plan), add_out(plan), add_seed(plan);
  plan->add_flag("--strict", opt.strict, "fail instead of reporting shortfalls");

  auto* sample = app.add_subcommand("sample", "draw a stage mixture from a manifest");
  add_manifest(sample), add_stage(sample), add_out(sample), add_seed(sample);
  sample->add_option("--n", opt.n, "records to draw")->required();
  sample->add_flag("--strict", opt.strict, "fail instead of reporting shortfalls");

  auto* exp = app.add_subcommand("export", "write the final manifest with caption versions");
  add_manifest(exp), add_out(exp);
  exp->add_option("--captions", opt.captions, "caption store (JSON lines)");
  exp->add_flag("--passed-only", opt.passed_only, "keep only PASS records");

  auto* serve = app.add_subcommand("serve", "run the HTTP service");
  add_manifest(serve), add_index(serve), add_seed(serve);
  serve->add_option("--host", opt.host, "bind address");
  serve->add_option("--port", opt.port, "bind port");

  std::vector<const char*> raw;
  raw.reserve(argv.size());
  for (const auto& a : argv) raw.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return 2;
  }

  try {
    Context ctx{CliConfig{}, opt, out, err};
    std::string config_path = opt.config;
    if (config_path.empty()) {
      if (const char* env = std::getenv("CURATION_CONFIG")) config_path = env;
    }
    if (!config_path.empty()) ctx.config = load_config(config_path);

    if (ingest->parsed()) return cmd_ingest(ctx);
    if (score->parsed()) return cmd_score(ctx);
    if (filter->parsed()) return cmd_filter(ctx);
    if (dedup->parsed()) return cmd_dedup(ctx);
    if (index_build->parsed()) return cmd_index_build(ctx);
    if (search->parsed()) return cmd_search(ctx);
    if (plan->parsed()) return cmd_plan(ctx);
    if (sample->parsed()) return cmd_sample(ctx);
    if (exp->parsed()) return cmd_export(ctx);
    if (serve->parsed()) return cmd_serve(ctx);
    err << app.help();
    return 2;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace curation

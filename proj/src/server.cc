#include "causalmine/server.h"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "causalmine/error.h"
#include "causalmine/pipeline.h"
#include "httplib.h"

namespace causalmine {

namespace fs = std::filesystem;
using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kMalformedInput:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kConflict:
      return 409;
    case ErrorCode::kPreconditionFailed:
      return 412;
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kClassificationIncomplete:
    case ErrorCode::kEnrichmentIncomplete:
      return 503;
    default:
      return 500;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message) {
  send_json(res, http_status(code),
            {{"error", {{"code", error_code_name(code)}, {"message", message}}}});
}

bool valid_run_id(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
  });
}

json concepts_array(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? json::array() : *it;
}

std::map<std::string, json> enriched_by_id(const Run& run) {
  std::map<std::string, json> out;
  std::ifstream in(run.path("enriched.jsonl"));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("quad_id")) continue;
    out[j["quad_id"].get<std::string>()] = j;
  }
  return out;
}

}  // namespace

ApiServer::ApiServer(std::string runs_root, std::string api_token)
    : root_(std::move(runs_root)), token_(std::move(api_token)),
      http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start(const std::string& host, int port) {
  int bound = port == 0 ? http_->bind_to_any_port(host) : (http_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::make_unique<std::thread>([this] { http_->listen_after_bind(); });
  http_->wait_until_ready();
  return bound;
}

bool ApiServer::listen(const std::string& host, int port) { return http_->listen(host, port); }

void ApiServer::stop() {
  if (http_) http_->stop();
  if (thread_ && thread_->joinable()) thread_->join();
  thread_.reset();
}

std::string ApiServer::run_dir(const std::string& id) const {
  if (!valid_run_id(id) || !Run::exists((fs::path(root_) / id).string()))
    throw Error(ErrorCode::kNotFound, "unknown run '" + id + "'");
  return (fs::path(root_) / id).string();
}

std::shared_ptr<ApiServer::RunState> ApiServer::state(const std::string& id) {
  const std::string dir = run_dir(id);
  std::lock_guard<std::mutex> lock(states_mu_);
  auto& st = states_[id];
  if (!st) {
    st = std::make_shared<RunState>();
    st->log = std::make_unique<VerdictLog>((fs::path(dir) / "verdicts.jsonl").string());
  }
  return st;
}

std::shared_ptr<const Resources> ApiServer::resources(const std::string& id, RunState& st) {
  std::lock_guard<std::mutex> lock(st.mu);
  if (!st.resources) {
    const Run run = Run::open(run_dir(id));
    PipelineConfig cfg = parse_config(run.record().config_snapshot, run.dir());
    apply_env_overrides(cfg);
    st.resources = std::make_shared<const Resources>(build_resources(cfg, run.record().models));
  }
  return st.resources;
}

void ApiServer::install_routes() {
  auto guarded = [this](auto fn) {
    return [this, fn](const httplib::Request& req, httplib::Response& res) {
      if (!token_.empty() && req.get_header_value("Authorization") != "Bearer " + token_) {
        send_json(res, 401, {{"error", {{"code", "unauthorized"}, {"message", "missing or bad token"}}}});
        return;
      }
      try {
        fn(req, res);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what());
      } catch (const json::exception& e) {
        send_error(res, ErrorCode::kMalformedInput, e.what());
      } catch (const std::exception& e) {
        send_json(res, 500, {{"error", {{"code", "internal"}, {"message", e.what()}}}});
      }
    };
  };

  http_->Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  http_->Get("/runs", guarded([this](const httplib::Request&, httplib::Response& res) {
    json runs = json::array();
    std::vector<fs::path> dirs;
    if (fs::is_directory(root_))
      for (const auto& e : fs::directory_iterator(root_))
        if (e.is_directory() && Run::exists(e.path().string())) dirs.push_back(e.path());
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      const Run run = Run::open(d.string());
      const RunRecord& r = run.record();
      runs.push_back({{"run_id", d.filename().string()},
                      {"created_at", format_iso8601(r.created_at)},
                      {"status", run_status_name(r.status)},
                      {"iteration", r.iteration},
                      {"models", r.models},
                      {"dataset", r.dataset}});
    }
    send_json(res, 200, {{"runs", runs}});
  }));

  http_->Get(R"(/runs/([^/]+)/candidates)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Run run = Run::open(run_dir(req.matches[1]));
    const std::string status = req.has_param("status") ? req.get_param_value("status") : "pending";
    if (status != "pending" && status != "reviewed" && status != "all")
      throw Error(ErrorCode::kInvalidArgument, "status must be pending, reviewed or all");
    std::size_t offset = 0, page_size = 50;
    try {
      if (req.has_param("page_token") && !req.get_param_value("page_token").empty())
        offset = std::stoul(req.get_param_value("page_token"));
      if (req.has_param("page_size")) page_size = std::stoul(req.get_param_value("page_size"));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "bad page_token or page_size");
    }
    if (page_size == 0 || page_size > 500)
      throw Error(ErrorCode::kInvalidArgument, "page_size must lie in 1..500");

    std::vector<CandidateRecord> cands;
    if (fs::exists(run.path("candidates.jsonl"))) cands = load_candidates(run);
    const auto verdicts = VerdictLog(run.path("verdicts.jsonl")).effective();
    const auto enriched = enriched_by_id(run);
    std::vector<const CandidateRecord*> items;
    for (const auto& c : cands) {
      if (!c.prediction.causal()) continue;
      const bool reviewed = verdicts.count(c.prediction.candidate.quad_id) != 0;
      if ((status == "pending" && reviewed) || (status == "reviewed" && !reviewed)) continue;
      items.push_back(&c);
    }
    std::stable_sort(items.begin(), items.end(), [](const auto* a, const auto* b) {
      if (a->prediction.decision.confidence != b->prediction.decision.confidence)
        return a->prediction.decision.confidence > b->prediction.decision.confidence;
      return a->prediction.candidate.quad_id < b->prediction.candidate.quad_id;
    });
    json page = json::array();
    for (std::size_t i = offset; i < items.size() && i < offset + page_size; ++i) {
      const Prediction& p = items[i]->prediction;
      json j = prediction_json(p);
      j["sentence_ids"] = p.candidate.sentence_ids;
      j["context"] = p.candidate.context;
      auto e = enriched.find(p.candidate.quad_id);
      j["subject_concepts"] = e == enriched.end() ? json::array() : concepts_array(e->second, "subject_concepts");
      j["object_concepts"] = e == enriched.end() ? json::array() : concepts_array(e->second, "object_concepts");
      auto v = verdicts.find(p.candidate.quad_id);
      j["verdict"] = v == verdicts.end() ? json(nullptr) : to_json(v->second);
      page.push_back(std::move(j));
    }
    json body = {{"run_id", std::string(req.matches[1])},
                 {"status", status},
                 {"total", items.size()},
                 {"items", page}};
    body["next_page_token"] =
        offset + page_size < items.size() ? json(std::to_string(offset + page_size)) : json(nullptr);
    send_json(res, 200, body);
  }));

  http_->Post(R"(/runs/([^/]+)/feedback)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto st = state(id);
    json body = json::parse(req.body, nullptr, false);
    if (body.is_discarded()) throw Error(ErrorCode::kMalformedInput, "body is not valid JSON");
    if (body.is_object() && !body.contains("timestamp"))
      body["timestamp"] = format_iso8601(now_timestamp());
    const FeedbackVerdict v = verdict_from_json(body);
    const Run run = Run::open(run_dir(id));
    submit_verdict(v, known_quad_ids(run), *st->log);
    send_json(res, 200, {{"accepted", to_json(v)}});
  }));

  http_->Post(R"(/runs/([^/]+)/evolve)",
              guarded([this](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    auto st = state(id);
    auto r = resources(id, *st);
    Run run = Run::open(run_dir(id));
    const EvolveOutcome out = evolve(run, *r);
    json body = {{"run_id", id}, {"iteration", out.iteration}, {"evolution", to_json(out.report)}};
    body["metrics"] = out.metrics ? to_json(*out.metrics) : json(nullptr);
    send_json(res, 200, body);
  }));

  http_->Get(R"(/runs/([^/]+)/metrics)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Run run = Run::open(run_dir(req.matches[1]));
    json history = json::array();
    std::ifstream in(run.path("evolution.jsonl"));
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) history.push_back(json::parse(line));
    json reports = json::object();
    if (fs::is_directory(run.path("reports"))) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(run.path("reports")))
        if (e.path().extension() == ".json") files.push_back(e.path());
      std::sort(files.begin(), files.end());
      for (const auto& f : files) {
        std::ifstream r(f);
        reports[f.stem().string()] = json::parse(r);
      }
    }
    const auto current = current_metrics(run);
    send_json(res, 200, {{"run_id", std::string(req.matches[1])},
                         {"iteration", run.record().iteration},
                         {"current", current ? to_json(*current) : json(nullptr)},
                         {"history", history},
                         {"reports", reports}});
  }));

  http_->Get(R"(/runs/([^/]+)/blocklist)",
             guarded([this](const httplib::Request& req, httplib::Response& res) {
    const Run run = Run::open(run_dir(req.matches[1]));
    const Blocklist bl = Blocklist::load(run.dir());
    json entries = json::array();
    for (const auto& e : bl.entries()) {
      json models = json::array();
      for (const auto& [m, v] : e.embeddings) models.push_back(m);
      entries.push_back({{"phrase", e.phrase},
                         {"quad_id", e.quad_id},
                         {"added_at", format_iso8601(e.added_at)},
                         {"models", models}});
    }
    send_json(res, 200, {{"run_id", std::string(req.matches[1])},
                         {"count", bl.size()},
                         {"entries", entries}});
  }));
}

}  // namespace causalmine

#include "causalmine/pipeline.h"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "causalmine/error.h"

namespace causalmine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_jsonl(const fs::path& path, const std::vector<json>& rows) {
  std::string content;
  for (const json& r : rows) content += r.dump() + "\n";
  write_atomic(path, content);
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::vector<json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

json without_endpoints(json c) {
  if (c.contains("models"))
    for (json& m : c["models"]) m.erase("endpoint");
  if (c.contains("tagger")) c["tagger"].erase("endpoint");
  if (c.contains("concepts")) c["concepts"].erase("endpoint");
  return c;
}

json score_json(double s) {
  if (std::isnan(s)) return nullptr;
  return s;
}

json quad_json(const CausalQuad& q) {
  return {{"subject", q.subject},
          {"trigger", q.trigger},
          {"object", q.object},
          {"confidence", q.confidence},
          {"provenance", provenance_name(q.provenance)}};
}

CausalQuad quad_from_json(const json& j) {
  CausalQuad q;
  q.subject = j.at("subject").get<std::string>();
  q.trigger = j.at("trigger").get<std::string>();
  q.object = j.at("object").get<std::string>();
  q.confidence = j.at("confidence").get<double>();
  q.provenance = parse_provenance(j.value("provenance", "predicted"));
  return q;
}

json per_model_json(const EnsembleDecision& d) {
  json pm = json::array();
  for (const ModelVerdict& v : d.verdicts)
    pm.push_back({{"model_id", v.model_id}, {"flagged", v.flagged}, {"score", score_json(v.best_score)}});
  return pm;
}

void require_stores(const Run& run) {
  for (const std::string& m : run.record().models)
    if (!VectorStore::exists(run.stores_dir(), m))
      throw Error(ErrorCode::kPreconditionFailed,
                  "no trained store for model '" + m + "' in " + run.dir() +
                      "; run `train` first");
}

StoreMap load_stores(const Run& run) {
  require_stores(run);
  StoreMap stores;
  for (const std::string& m : run.record().models)
    stores.emplace(m, VectorStore::load(run.stores_dir(), m));
  return stores;
}

EnsembleConfig ensemble_config(const Run& run) {
  EnsembleConfig e;
  const json& c = run.record().config_snapshot;
  e.classification_threshold = c.value("classification_threshold", 0.85);
  e.degree_threshold = std::min<int>(c.value("degree_threshold", 4),
                                     static_cast<int>(run.record().models.size()));
  e.model_ids = run.record().models;
  return e;
}

json candidate_json(const Prediction& p, const std::optional<bool>& gold) {
  json j = {{"quad_id", p.candidate.quad_id},
            {"subject", p.candidate.quad.subject},
            {"trigger", p.candidate.quad.trigger},
            {"object", p.candidate.quad.object},
            {"confidence", p.decision.confidence},
            {"degree", p.decision.degree},
            {"voted_causal", p.decision.causal},
            {"blocklisted", p.blocklisted},
            {"causal", p.causal()},
            {"per_model", per_model_json(p.decision)},
            {"sentence_ids", p.candidate.sentence_ids},
            {"context", p.candidate.context}};
  j["gold"] = gold ? json(*gold) : json(nullptr);
  return j;
}

// Writes candidates.jsonl and predictions.jsonl for classified candidates.
ClassifySummary write_classification(const Run& run, const std::vector<Prediction>& preds,
                                     const std::vector<std::optional<bool>>& gold) {
  ClassifySummary s;
  std::vector<json> cand_rows, pred_rows;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    cand_rows.push_back(candidate_json(preds[i], gold[i]));
    if (preds[i].blocklisted) ++s.blocklisted;
    if (preds[i].causal()) {
      pred_rows.push_back(prediction_json(preds[i]));
      ++s.predicted;
    }
  }
  s.candidates = preds.size();
  write_jsonl(run.path("candidates.jsonl"), cand_rows);
  write_jsonl(run.path("predictions.jsonl"), pred_rows);
  return s;
}

}  // namespace

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::kTraining: return "training";
    case RunStatus::kClassifying: return "classifying";
    case RunStatus::kAwaitingReview: return "awaiting_review";
    case RunStatus::kEvolved: return "evolved";
    case RunStatus::kFailed: return "failed";
  }
  return "?";
}

RunStatus parse_run_status(std::string_view s) {
  for (RunStatus r : {RunStatus::kTraining, RunStatus::kClassifying, RunStatus::kAwaitingReview,
                      RunStatus::kEvolved, RunStatus::kFailed})
    if (run_status_name(r) == s) return r;
  throw Error(ErrorCode::kMalformedInput, "unknown run status '" + std::string(s) + "'");
}

bool transition_allowed(RunStatus from, RunStatus to) {
  if (to == RunStatus::kFailed || from == to) return true;
  if (from == RunStatus::kFailed) return to == RunStatus::kTraining;
  if (from == RunStatus::kEvolved && to == RunStatus::kClassifying) return true;
  return static_cast<int>(to) > static_cast<int>(from);
}

json to_json(const RunRecord& r) {
  json applied = json::object();
  for (const auto& [q, v] : r.applied) applied[q] = verdict_name(v);
  return {{"run_id", r.run_id},
          {"created_at", format_iso8601(r.created_at)},
          {"config", r.config_snapshot},
          {"status", run_status_name(r.status)},
          {"iteration", r.iteration},
          {"models", r.models},
          {"dataset", r.dataset},
          {"applied", applied}};
}

RunRecord run_record_from_json(const json& j) {
  try {
    RunRecord r;
    r.run_id = j.at("run_id").get<std::string>();
    r.created_at = parse_iso8601(j.at("created_at").get<std::string>());
    r.config_snapshot = j.at("config");
    r.status = parse_run_status(j.at("status").get<std::string>());
    r.iteration = j.at("iteration").get<int>();
    r.models = j.at("models").get<std::vector<std::string>>();
    r.dataset = j.value("dataset", "");
    const json applied = j.value("applied", json::object());
    for (const auto& [q, v] : applied.items())
      r.applied[q] = parse_verdict(v.get<std::string>());
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, std::string("bad run.json: ") + e.what());
  }
}

RunLock RunLock::try_acquire(const std::string& run_dir, const std::string& what) {
  const std::string p = (fs::path(run_dir) / ".lock").string();
  int fd = ::open(p.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIo, "cannot open " + p + ": " + std::strerror(errno));
  if (::flock(fd, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd);
    throw Error(ErrorCode::kConflict, what + ": another writer holds the run lock");
  }
  return RunLock(fd);
}

RunLock::RunLock(RunLock&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

RunLock::~RunLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

bool Run::exists(const std::string& dir) { return fs::exists(fs::path(dir) / "run.json"); }

Run Run::open(const std::string& dir) {
  if (!exists(dir)) throw Error(ErrorCode::kNotFound, "no run at " + dir);
  std::ifstream in(fs::path(dir) / "run.json");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, dir + "/run.json: " + e.what());
  }
  Run run;
  run.dir_ = dir;
  run.record_ = run_record_from_json(j);
  return run;
}

Run Run::open_or_create(const std::string& dir, const PipelineConfig& config,
                        const std::vector<std::string>& models) {
  if (exists(dir)) {
    Run run = open(dir);
    if (without_endpoints(run.record_.config_snapshot) != without_endpoints(to_json(config)))
      throw Error(ErrorCode::kPreconditionFailed,
                  "config differs from the snapshot of run " + run.record_.run_id);
    return run;
  }
  fs::create_directories(dir);
  Run run;
  run.dir_ = dir;
  run.record_.run_id = fs::path(dir).lexically_normal().filename().string();
  if (run.record_.run_id.empty() || run.record_.run_id == ".")
    run.record_.run_id = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  run.record_.created_at = now_timestamp();
  run.record_.config_snapshot = to_json(config);
  run.record_.models = resolve_models(config, models);
  run.save();
  return run;
}

void Run::set_status(RunStatus s) {
  if (!transition_allowed(record_.status, s))
    throw Error(ErrorCode::kPreconditionFailed,
                "run " + record_.run_id + " cannot go from " +
                    std::string(run_status_name(record_.status)) + " to " +
                    std::string(run_status_name(s)));
  record_.status = s;
}

void Run::save() const { write_atomic(fs::path(dir_) / "run.json", to_json(record_).dump(2) + "\n"); }

std::string Run::path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

std::vector<std::string> resolve_models(const PipelineConfig& config,
                                        const std::vector<std::string>& requested) {
  std::vector<std::string> all = config.model_ids();
  if (requested.empty()) return all;
  std::vector<std::string> out;
  for (const auto& m : requested) {
    if (std::find(all.begin(), all.end(), m) == all.end())
      throw Error(ErrorCode::kInvalidArgument, "unknown model '" + m + "'");
    if (std::find(out.begin(), out.end(), m) != out.end())
      throw Error(ErrorCode::kInvalidArgument, "model '" + m + "' listed twice");
    out.push_back(m);
  }
  return out;
}

TrainSummary train(Run& run, const PipelineConfig& config, const Resources& resources,
                   const std::string& dataset) {
  RunLock lock = RunLock::try_acquire(run.dir(), "train");
  if (run.record().status != RunStatus::kTraining && run.record().status != RunStatus::kFailed)
    throw Error(ErrorCode::kPreconditionFailed,
                "run " + run.record().run_id + " is already trained (status " +
                    std::string(run_status_name(run.record().status)) + ")");
  run.set_status(RunStatus::kTraining);
  run.save();
  try {
    const std::vector<AnnotatedSentence> annotated =
        load_training(dataset_spec(config, dataset), resources);
    const TrainingSet ts = build_training_set(annotated, resources.expansion,
                                              resources.word_models(),
                                              config.quad_filter_threshold);
    std::vector<json> rows;
    for (std::size_t i = 0; i < ts.quads.size(); ++i) {
      json j = quad_json(ts.quads[i]);
      j["quad_id"] = training_quad_id(i);
      rows.push_back(std::move(j));
    }
    write_jsonl(run.path("training_quads.jsonl"), rows);
    const StoreMap stores =
        build_stores(ts.quads, resources.providers, run.record().models, config.bin_size);
    fs::create_directories(run.stores_dir());
    for (const auto& [m, store] : stores) store.save(run.stores_dir());
    run.set_status(RunStatus::kClassifying);
    run.save();
    return {ts.seeds.size(), ts.quads.size(), stores.size()};
  } catch (const Error& e) {
    run.set_status(RunStatus::kFailed);
    run.save();
    throw Error(e.code(), std::string("train: ") + e.what());
  }
}

std::size_t extract(Run& run, const PipelineConfig& config, const Resources& resources,
                    const std::string& dataset) {
  RunLock lock = RunLock::try_acquire(run.dir(), "extract");
  const EvalDataset ds = load_dataset(dataset, dataset_spec(config, dataset), resources);
  std::vector<TaggedSentence> sentences;
  for (const auto& s : ds.sentences) sentences.push_back(s.sentence);
  std::vector<json> rows;
  for (const Candidate& c : collect_candidates(sentences)) {
    json j = {{"quad_id", c.quad_id},
              {"subject", c.quad.subject},
              {"trigger", c.quad.trigger},
              {"object", c.quad.object},
              {"sentence_ids", c.sentence_ids},
              {"context", c.context}};
    rows.push_back(std::move(j));
  }
  write_jsonl(run.path("extracted.jsonl"), rows);
  return rows.size();
}

ClassifySummary classify(Run& run, const PipelineConfig& config, const Resources& resources,
                         const std::string& dataset) {
  RunLock lock = RunLock::try_acquire(run.dir(), "classify");
  const RunStatus st = run.record().status;
  if (st == RunStatus::kTraining || st == RunStatus::kFailed) require_stores(run);
  const StoreMap stores = load_stores(run);
  if (st == RunStatus::kTraining || st == RunStatus::kFailed)
    throw Error(ErrorCode::kPreconditionFailed,
                "run " + run.record().run_id + " has not finished `train`");
  if (st == RunStatus::kEvolved) {
    run.set_status(RunStatus::kClassifying);
    run.save();
  }
  try {
    const EvalDataset ds = load_dataset(dataset, dataset_spec(config, dataset), resources);
    std::vector<TaggedSentence> sentences;
    for (const auto& s : ds.sentences) sentences.push_back(s.sentence);
    const std::vector<Candidate> candidates = collect_candidates(sentences);
    const Blocklist blocklist = Blocklist::load(run.dir());
    const EnsembleConfig ens = ensemble_config(run);
    const std::vector<Prediction> preds = classify_candidates(
        candidates, stores, resources.providers, ens, &blocklist, ens.classification_threshold);
    std::vector<std::optional<bool>> gold(preds.size());
    if (ds.labeled) {
      const std::set<std::string> g = gold_triples(ds);
      for (std::size_t i = 0; i < preds.size(); ++i) gold[i] = g.count(preds[i].candidate.quad_id) != 0;
    }
    ClassifySummary s = write_classification(run, preds, gold);
    run.mutable_record().dataset = dataset;
    run.set_status(RunStatus::kAwaitingReview);
    run.save();
    return s;
  } catch (const Error& e) {
    throw Error(e.code(), std::string("classify: ") + e.what());
  }
}

std::size_t enrich(Run& run, const Resources& resources) {
  if (!resources.concepts)
    throw Error(ErrorCode::kPreconditionFailed, "enrich: no concept provider configured");
  if (!fs::exists(run.path("predictions.jsonl")))
    throw Error(ErrorCode::kPreconditionFailed, "enrich: no predictions; run `classify` first");
  RunLock lock = RunLock::try_acquire(run.dir(), "enrich");
  std::vector<json> preds = read_jsonl(run.path("predictions.jsonl"));
  std::vector<CausalQuad> quads;
  for (const json& p : preds) quads.push_back(quad_from_json(p));
  std::vector<EnrichedQuad> enriched = enrich_and_filter(quads, *resources.concepts);
  auto concepts_json = [](const std::vector<ConceptAnnotation>& cs) {
    json a = json::array();
    for (const auto& c : cs)
      a.push_back({{"cui", c.cui},
                   {"preferred_name", c.preferred_name},
                   {"semantic_types", c.semantic_types},
                   {"matched_text", c.matched_text}});
    return a;
  };
  std::vector<json> rows;
  std::size_t next = 0;
  for (const json& p : preds) {
    if (next >= enriched.size()) break;
    const EnrichedQuad& e = enriched[next];
    if (e.quad.phrase() != quad_from_json(p).phrase()) continue;  // dropped: no concepts
    json j = p;
    j["subject_concepts"] = concepts_json(e.subject_concepts);
    j["object_concepts"] = concepts_json(e.object_concepts);
    rows.push_back(std::move(j));
    ++next;
  }
  write_jsonl(run.path("enriched.jsonl"), rows);
  return rows.size();
}

EvaluationReport evaluate(Run& run, const PipelineConfig& config, const Resources& resources,
                          Stage stage, const std::string& dataset) {
  const EvalDataset ds = load_dataset(dataset, dataset_spec(config, dataset), resources);
  if (!ds.labeled)
    throw Error(ErrorCode::kPreconditionFailed,
                "evaluate: dataset '" + dataset + "' carries no gold labels");
  StageConfig sc;
  sc.stage = stage;
  sc.model_ids = run.record().models;
  sc.expansion = resources.expansion;
  sc.quad_filter_threshold = config.quad_filter_threshold;
  sc.classification_threshold = config.classification_threshold;
  sc.degree_threshold = std::min<int>(config.degree_threshold, static_cast<int>(sc.model_ids.size()));
  sc.bin_size = config.bin_size;

  StageInputs in;
  in.dataset = &ds;
  in.providers = &resources.providers;
  in.word_models = resources.word_models();
  std::vector<AnnotatedSentence> training;
  StoreMap stores;
  Blocklist blocklist;
  if (stage == Stage::kFeedback) {
    stores = load_stores(run);
    blocklist = Blocklist::load(run.dir());
    in.stores = &stores;
    in.blocklist = &blocklist;
  } else {
    training = load_training(dataset_spec(config, "train"), resources);
    in.training = &training;
  }
  EvaluationReport r = run_stage(sc, in);
  write_report(r, run.path("reports"), dataset + ".stage-" + stage_name(stage));
  return r;
}

EvolveOutcome evolve(Run& run, const Resources& resources) {
  RunLock lock = RunLock::try_acquire(run.dir(), "evolve");
  run = Run::open(run.dir());  // pick up writes made before the lock was taken
  const RunStatus st = run.record().status;
  if (st != RunStatus::kAwaitingReview && st != RunStatus::kEvolved)
    throw Error(ErrorCode::kPreconditionFailed,
                "evolve: run " + run.record().run_id + " has no classified candidates (status " +
                    std::string(run_status_name(st)) + ")");

  std::vector<CandidateRecord> cands = load_candidates(run);
  std::map<std::string, CausalQuad> quads_by_id;
  for (const auto& c : cands) quads_by_id[c.prediction.candidate.quad_id] = c.prediction.candidate.quad;

  const VerdictLog log(run.path("verdicts.jsonl"));
  std::vector<FeedbackVerdict> pending;
  for (const auto& [q, v] : log.effective()) {
    auto it = run.record().applied.find(q);
    if (it == run.record().applied.end() || it->second != v.verdict) pending.push_back(v);
  }

  StoreMap stores = load_stores(run);
  Blocklist blocklist = Blocklist::load(run.dir());
  const EnsembleConfig ens = ensemble_config(run);
  EvolveOutcome out;
  out.report = apply_feedback(pending, quads_by_id, stores, blocklist, resources.providers,
                              run.record().models, ens.classification_threshold);

  // re-classify before touching disk so a provider failure changes nothing
  std::vector<Candidate> candidates;
  std::vector<std::optional<bool>> gold;
  for (const auto& c : cands) {
    candidates.push_back(c.prediction.candidate);
    gold.push_back(c.gold);
  }
  const std::vector<Prediction> preds = classify_candidates(
      candidates, stores, resources.providers, ens, &blocklist, ens.classification_threshold);

  for (const auto& [m, store] : stores) store.save(run.stores_dir());
  blocklist.save(run.dir());
  RunRecord& rec = run.mutable_record();
  for (const auto& v : pending) rec.applied[v.quad_id] = v.verdict;
  rec.iteration += 1;
  run.set_status(RunStatus::kEvolved);
  run.save();

  write_classification(run, preds, gold);
  run.set_status(RunStatus::kClassifying);
  run.set_status(RunStatus::kAwaitingReview);
  run.save();

  out.iteration = rec.iteration;
  out.metrics = current_metrics(run);
  json line = {{"iteration", out.iteration},
               {"at", format_iso8601(now_timestamp())},
               {"evolution", to_json(out.report)}};
  if (out.metrics) line["metrics"] = to_json(*out.metrics);
  std::ofstream ev(run.path("evolution.jsonl"), std::ios::app);
  ev << line.dump() << "\n";
  return out;
}

nlohmann::json prediction_json(const Prediction& p) {
  return {{"quad_id", p.candidate.quad_id},
          {"subject", p.candidate.quad.subject},
          {"trigger", p.candidate.quad.trigger},
          {"object", p.candidate.quad.object},
          {"confidence", p.decision.confidence},
          {"degree", p.decision.degree},
          {"per_model", per_model_json(p.decision)}};
}

std::vector<CandidateRecord> load_candidates(const Run& run) {
  if (!fs::exists(run.path("candidates.jsonl")))
    throw Error(ErrorCode::kPreconditionFailed, "no candidates; run `classify` first");
  std::vector<CandidateRecord> out;
  for (const json& j : read_jsonl(run.path("candidates.jsonl"))) {
    try {
      CandidateRecord r;
      Prediction& p = r.prediction;
      p.candidate.quad_id = j.at("quad_id").get<std::string>();
      p.candidate.quad.subject = j.at("subject").get<std::string>();
      p.candidate.quad.trigger = j.at("trigger").get<std::string>();
      p.candidate.quad.object = j.at("object").get<std::string>();
      p.candidate.quad.provenance = Provenance::kPredicted;
      p.candidate.quad.confidence = j.at("confidence").get<double>();
      p.candidate.sentence_ids = j.at("sentence_ids").get<std::vector<std::string>>();
      p.candidate.context = j.value("context", "");
      p.decision.confidence = p.candidate.quad.confidence;
      p.decision.degree = j.at("degree").get<int>();
      p.decision.causal = j.at("voted_causal").get<bool>();
      p.blocklisted = j.at("blocklisted").get<bool>();
      for (const json& v : j.at("per_model")) {
        ModelVerdict mv;
        mv.model_id = v.at("model_id").get<std::string>();
        mv.flagged = v.at("flagged").get<bool>();
        mv.best_score = v.at("score").is_null() ? std::nan("") : v.at("score").get<double>();
        p.decision.verdicts.push_back(std::move(mv));
      }
      if (j.contains("gold") && !j["gold"].is_null()) r.gold = j["gold"].get<bool>();
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedInput, std::string("bad candidate record: ") + e.what());
    }
  }
  return out;
}

std::set<std::string> known_quad_ids(const Run& run) {
  std::set<std::string> out;
  if (!fs::exists(run.path("candidates.jsonl"))) return out;
  for (const auto& c : load_candidates(run)) out.insert(c.prediction.candidate.quad_id);
  return out;
}

std::optional<EvaluationReport> current_metrics(const Run& run) {
  if (!fs::exists(run.path("candidates.jsonl"))) return std::nullopt;
  std::vector<CandidateRecord> cands = load_candidates(run);
  std::vector<Prediction> preds;
  std::set<std::string> gold;
  for (auto& c : cands) {
    if (!c.gold) return std::nullopt;
    if (*c.gold) gold.insert(c.prediction.candidate.quad_id);
    preds.push_back(std::move(c.prediction));
  }
  const bool feedback = run.record().iteration > 0;
  return score_predictions(run.record().dataset, feedback ? "feedback" : "4", preds, gold,
                           run.record().models.size() >= 2);
}

}  // namespace causalmine

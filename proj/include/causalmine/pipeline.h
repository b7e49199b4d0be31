#ifndef CAUSALMINE_PIPELINE_H_
#define CAUSALMINE_PIPELINE_H_

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "causalmine/config.h"
#include "causalmine/eval.h"
#include "causalmine/feedback.h"
#include "json.hpp"

namespace causalmine {

enum class RunStatus { kTraining, kClassifying, kAwaitingReview, kEvolved, kFailed };

std::string_view run_status_name(RunStatus s);
RunStatus parse_run_status(std::string_view s);
// Forward only, plus evolved -> classifying and anything -> failed.
bool transition_allowed(RunStatus from, RunStatus to);

struct RunRecord {
  std::string run_id;
  Timestamp created_at = 0;
  nlohmann::json config_snapshot;
  RunStatus status = RunStatus::kTraining;
  int iteration = 0;
  std::vector<std::string> models;
  std::string dataset;                        // last classified dataset
  std::map<std::string, Verdict> applied;     // verdicts already evolved in
};

nlohmann::json to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

// Exclusive advisory lock on <run_dir>/.lock (flock). Works across threads
// and processes.
class RunLock {
 public:
  // Throws kConflict when another writer holds the lock.
  static RunLock try_acquire(const std::string& run_dir, const std::string& what);
  RunLock(RunLock&& other) noexcept;
  RunLock& operator=(RunLock&&) = delete;
  ~RunLock();

 private:
  explicit RunLock(int fd) : fd_(fd) {}
  int fd_ = -1;
};

// Layout of a run directory:
//   run.json                 RunRecord
//   training_quads.jsonl     expanded and filtered training quads
//   stores/<model>.vs(.json) vector stores
//   extracted.jsonl          candidate triples (extract)
//   candidates.jsonl         every candidate with its decision (classify)
//   predictions.jsonl        predicted-causal quads only
//   enriched.jsonl           predictions with concept annotations
//   verdicts.jsonl           expert verdicts, append-only
//   blocklist.jsonl, blocklist/<model>.jsonl
//   reports/                 evaluation reports
//   evolution.jsonl          one line per evolve
class Run {
 public:
  static bool exists(const std::string& dir);
  static Run open(const std::string& dir);
  // Opens an existing run or creates one; the config snapshot of an existing
  // run must match `config` (provider endpoints excepted).
  static Run open_or_create(const std::string& dir, const PipelineConfig& config,
                            const std::vector<std::string>& models);

  const std::string& dir() const { return dir_; }
  const RunRecord& record() const { return record_; }
  RunRecord& mutable_record() { return record_; }
  void set_status(RunStatus s);
  void save() const;

  std::string path(const std::string& name) const;
  std::string stores_dir() const { return path("stores"); }

 private:
  std::string dir_;
  RunRecord record_;
};

// Resolves the model panel: explicit list, else the run's, else every
// configured model.
std::vector<std::string> resolve_models(const PipelineConfig& config,
                                        const std::vector<std::string>& requested);

struct TrainSummary {
  std::size_t seeds = 0;
  std::size_t quads = 0;
  std::size_t models = 0;
};

TrainSummary train(Run& run, const PipelineConfig& config, const Resources& resources,
                   const std::string& dataset = "train");

std::size_t extract(Run& run, const PipelineConfig& config, const Resources& resources,
                    const std::string& dataset);

struct ClassifySummary {
  std::size_t candidates = 0;
  std::size_t predicted = 0;
  std::size_t blocklisted = 0;
};

// Needs a store per run model; otherwise kPreconditionFailed naming `train`.
ClassifySummary classify(Run& run, const PipelineConfig& config, const Resources& resources,
                         const std::string& dataset);

// Needs a concept provider and predictions.
std::size_t enrich(Run& run, const Resources& resources);

// Stages 1-4 are rebuilt from the configured training set; the feedback
// stage uses the run's current stores and blocklist. The report is written
// to reports/<dataset>.stage-<stage>.{json,csv}.
EvaluationReport evaluate(Run& run, const PipelineConfig& config, const Resources& resources,
                          Stage stage, const std::string& dataset);

struct EvolveOutcome {
  EvolutionReport report;
  int iteration = 0;
  std::optional<EvaluationReport> metrics;  // when gold labels exist
};

// Applies verdicts not yet evolved in, persists stores and blocklist, bumps
// the iteration, and re-classifies the run's candidates. Throws kConflict
// when another writer holds the run lock.
EvolveOutcome evolve(Run& run, const Resources& resources);

// Artifact readers shared by the CLI and the HTTP layer.
struct CandidateRecord {
  Prediction prediction;
  std::optional<bool> gold;
};

std::vector<CandidateRecord> load_candidates(const Run& run);
std::set<std::string> known_quad_ids(const Run& run);
nlohmann::json prediction_json(const Prediction& p);
// Metrics over the stored candidates; nullopt without gold labels.
std::optional<EvaluationReport> current_metrics(const Run& run);

}  // namespace causalmine

#endif  // CAUSALMINE_PIPELINE_H_

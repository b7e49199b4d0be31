#ifndef CAUSALMINE_FEEDBACK_H_
#define CAUSALMINE_FEEDBACK_H_

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "causalmine/ensemble.h"
#include "json.hpp"

namespace causalmine {

// Milliseconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

// Accepts YYYY-MM-DDTHH:MM:SS[.fff](Z|+HH:MM|-HH:MM).
Timestamp parse_iso8601(const std::string& text);
// YYYY-MM-DDTHH:MM:SS.mmmZ
std::string format_iso8601(Timestamp ts);
Timestamp now_timestamp();

enum class Verdict { kCausal, kNonCausal };

std::string_view verdict_name(Verdict v);
Verdict parse_verdict(std::string_view name);

struct FeedbackVerdict {
  std::string quad_id;
  Verdict verdict = Verdict::kCausal;
  std::string expert_id;
  Timestamp timestamp = 0;
  std::optional<std::string> note;
  // Persisted with the verdict; evolution does not consume it.
  std::optional<double> confidence_override;
};

nlohmann::json to_json(const FeedbackVerdict& v);
// Throws kMalformedInput on missing or ill-typed fields.
FeedbackVerdict verdict_from_json(const nlohmann::json& j);

// Append-only JSONL verdict log. For each (quad_id, expert_id) the verdict
// with the latest timestamp wins; on equal timestamps the later append wins.
class VerdictLog {
 public:
  explicit VerdictLog(std::string path);

  void append(const FeedbackVerdict& verdict);
  std::vector<FeedbackVerdict> all() const;
  std::size_t size() const;

  // Latest verdict per (quad_id, expert_id).
  std::vector<FeedbackVerdict> latest() const;
  // One verdict per quad: the latest across experts (expert_id breaks ties).
  std::map<std::string, FeedbackVerdict> effective() const;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::vector<FeedbackVerdict> entries_;
};

// Validates the quad id against the run's predictions and appends.
void submit_verdict(const FeedbackVerdict& verdict, const std::set<std::string>& known_quad_ids,
                    VerdictLog& log);

struct BlocklistEntry {
  std::string phrase;
  std::string quad_id;
  Timestamp added_at = 0;
  std::map<std::string, std::vector<float>> embeddings;  // model_id -> vector
};

// Expert-declared non-causal phrases. Only grows.
class Blocklist {
 public:
  bool contains(const std::string& phrase) const { return phrases_.count(phrase) != 0; }
  // Returns false (and changes nothing) if the phrase is already present.
  bool add(BlocklistEntry entry);
  const std::vector<BlocklistEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

  // Probe matrix of all entries for one model (rows in entry order).
  EmbeddingMatrix probes(const std::string& model_id, std::size_t dimension) const;

  // <dir>/blocklist.jsonl plus <dir>/blocklist/<model_id>.jsonl vector files.
  void save(const std::string& dir) const;
  static Blocklist load(const std::string& dir);

 private:
  std::vector<BlocklistEntry> entries_;
  std::set<std::string> phrases_;
};

// True for rows whose embedding under any model has similarity >= threshold
// to any blocklist entry's embedding under that model.
std::vector<bool> blocklist_mask(const EmbeddingsByModel& embeddings, const Blocklist& blocklist,
                                 double threshold = 0.85);

// Removes blocklisted predictions; `embeddings` rows align with `predictions`.
std::vector<CausalQuad> blocklist_filter(const std::vector<CausalQuad>& predictions,
                                         const EmbeddingsByModel& embeddings,
                                         const Blocklist& blocklist, double threshold = 0.85);

struct EvolutionReport {
  std::size_t appended = 0;
  std::size_t blocklisted = 0;
  std::map<std::string, std::size_t> removed_per_model;
};

nlohmann::json to_json(const EvolutionReport& r);

// Causal verdicts: the phrase is embedded per model and appended to every
// store. Non-causal verdicts: the phrase joins the blocklist and every store
// drops entries with similarity >= threshold to it (purges run before
// appends). All embeddings are computed before anything is mutated, so a
// provider failure leaves stores and blocklist untouched.
EvolutionReport apply_feedback(const std::vector<FeedbackVerdict>& verdicts,
                               const std::map<std::string, CausalQuad>& quads_by_id,
                               StoreMap& stores, Blocklist& blocklist,
                               const ProviderMap& providers,
                               const std::vector<std::string>& model_ids,
                               double threshold = 0.85);

}  // namespace causalmine

#endif  // CAUSALMINE_FEEDBACK_H_

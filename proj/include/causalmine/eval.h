#ifndef CAUSALMINE_EVAL_H_
#define CAUSALMINE_EVAL_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "causalmine/engine.h"
#include "json.hpp"

namespace causalmine {

struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fn = 0;
  std::uint64_t fp = 0;
  std::uint64_t tn = 0;

  std::uint64_t pp() const { return tp + fp; }
  std::uint64_t pn() const { return fn + tn; }
  std::uint64_t total() const { return pp() + pn(); }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Percentages are carried as integer hundredths, rounded half up, so that
// reports compare exactly. nullopt means undefined (zero denominator).
using Percent = std::optional<std::int64_t>;

Percent percent_hundredths(std::uint64_t num, std::uint64_t den);
// "88.55", or "undefined".
std::string format_percent(const Percent& p);
std::optional<double> percent_value(const Percent& p);

struct Metrics {
  Percent accuracy;
  Percent precision;
  Percent recall;
  bool operator==(const Metrics&) const = default;
};

ConfusionMatrix confusion(const std::set<std::string>& predictions,
                          const std::set<std::string>& gold,
                          const std::set<std::string>& universe);
Metrics metrics(const ConfusionMatrix& m);

struct DegreeRange {
  int lo = 1;
  int hi = 1;  // inclusive
};

struct DegreeGroup {
  DegreeRange range;
  ConfusionMatrix matrix;
  Metrics metrics;
};

struct DegreeReport {
  std::map<int, std::size_t> histogram;     // degree >= 1 -> quads
  std::map<int, std::size_t> tp_in_degree;  // degree >= 1 -> gold quads
  std::size_t gold_missed = 0;              // gold quads in no model set
  std::vector<DegreeGroup> groups;
};

// Group metrics are taken over the union of the model sets: a group predicts
// the quads whose degree falls in its range. Default ranges: 1..3 and 4..k
// (k = number of models; the second range is dropped when k < 4).
DegreeReport degree_report(const std::map<std::string, std::set<std::string>>& per_model,
                           const std::set<std::string>& gold,
                           std::vector<DegreeRange> ranges = {});

enum class Stage { kWordVectors = 1, kSentenceEmbedding = 2, kNominal = 3, kEnsemble = 4, kFeedback = 5 };

std::string stage_name(Stage s);  // "1".."4", "feedback"
Stage parse_stage(const std::string& s);

struct LabeledSentence {
  TaggedSentence sentence;
  bool causal = false;
};

struct EvalDataset {
  std::string id;
  std::vector<LabeledSentence> sentences;
  bool labeled = true;  // false: causal flags carry no information
};

struct StageConfig {
  Stage stage = Stage::kEnsemble;
  std::vector<std::string> model_ids;  // stages 1-3 use the first only
  ExpansionConfig expansion;           // expand_nominals is set by the stage
  double quad_filter_threshold = 0.5;
  double classification_threshold = 0.85;
  int degree_threshold = 4;
  std::size_t bin_size = kDefaultBinSize;
};

struct EvaluationReport {
  std::string dataset_id;
  std::string stage_id;
  std::string universe;  // "sentences" or "triples"
  ConfusionMatrix matrix;
  Metrics metrics;
  std::map<std::string, ConfusionMatrix> per_model;
  std::optional<DegreeReport> degrees;
};

nlohmann::json to_json(const ConfusionMatrix& m);
nlohmann::json to_json(const Metrics& m);
nlohmann::json to_json(const EvaluationReport& r);

std::string report_csv_header();
std::string report_csv_row(const EvaluationReport& r);
std::string degree_csv(const DegreeReport& d);

// Writes <dir>/<stem>.json, <dir>/<stem>.csv and, when present,
// <dir>/<stem>.degrees.csv.
void write_report(const EvaluationReport& r, const std::string& dir, const std::string& stem);

struct StageInputs {
  const std::vector<AnnotatedSentence>* training = nullptr;
  const EvalDataset* dataset = nullptr;
  const ProviderMap* providers = nullptr;
  std::vector<const WordVectorModel*> word_models;
  // Prebuilt stores; built from the training sentences when null.
  const StoreMap* stores = nullptr;
  const Blocklist* blocklist = nullptr;  // feedback stage only
};

// Stages 1-2 score sentences (a sentence is predicted causal when any of its
// candidates is). Stages 3 and later score distinct triples; a triple is
// gold-causal when it occurs in any causal sentence.
EvaluationReport run_stage(const StageConfig& config, const StageInputs& inputs);

// Scores already-classified predictions over the triple universe.
EvaluationReport score_predictions(const std::string& dataset_id, const std::string& stage_id,
                                   const std::vector<Prediction>& predictions,
                                   const std::set<std::string>& gold_quad_ids,
                                   bool with_degrees);

// Quad ids of candidates that occur in at least one causal sentence.
std::set<std::string> gold_triples(const EvalDataset& dataset);

}  // namespace causalmine

#endif  // CAUSALMINE_EVAL_H_

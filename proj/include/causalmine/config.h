#ifndef CAUSALMINE_CONFIG_H_
#define CAUSALMINE_CONFIG_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "causalmine/concepts.h"
#include "causalmine/ensemble.h"
#include "causalmine/eval.h"
#include "causalmine/expand.h"
#include "causalmine/tagger.h"
#include "json.hpp"

namespace causalmine {

// One embedding model of the panel.
//   hashed:       dimension, seed
//   file:         path (JSONL phrase/vector)
//   http:         endpoint, model
//   word_vectors: path (text vector file), averaged per phrase
struct ModelSpec {
  std::string id;
  std::string kind;
  std::string path;
  std::string endpoint;
  std::string model;
  std::size_t dimension = 0;
  std::string seed;
};

// semeval: SemEval-style file (optional answer key), entity-annotated
// jsonl:    {"id", "text" | "tagged", "causal"?} per line
// text:     one plain document, unlabeled
struct DatasetSpec {
  std::string format;
  std::string path;
  std::string key;
};

struct PipelineConfig {
  double alpha = 0.5;
  std::size_t top_k = 10;
  double quad_filter_threshold = 0.5;
  double classification_threshold = 0.85;
  int degree_threshold = 4;
  std::size_t bin_size = kDefaultBinSize;

  std::vector<ModelSpec> models;
  std::vector<std::string> word_vectors;  // expansion models
  std::string synonyms;

  std::string tagger = "heuristic";  // heuristic | http
  std::string tagger_endpoint;
  std::string tagger_lexicon;

  std::string concepts;  // "" | dictionary | http
  std::string concepts_path;
  std::string concepts_endpoint;

  std::string lemmas;
  std::string stopwords;
  std::string abbreviations;

  std::map<std::string, DatasetSpec> datasets;  // "train" is the training set
  std::string api_token;
  double http_timeout_seconds = 10.0;

  std::vector<std::string> model_ids() const;
  void validate() const;
};

// Parses and validates; relative paths resolve against `base_dir`.
PipelineConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
// Reads the file, applies environment overrides, validates.
PipelineConfig load_config(const std::string& path);
nlohmann::json to_json(const PipelineConfig& c);

// Environment variables override provider endpoints only:
//   CAUSALMINE_EMBED_ENDPOINT_<ID>  (ID upper-cased, other chars -> '_')
//   CAUSALMINE_EMBED_ENDPOINT       (every http model without its own)
//   CAUSALMINE_TAGGER_ENDPOINT, CAUSALMINE_CONCEPT_ENDPOINT
void apply_env_overrides(PipelineConfig& c);
std::string embed_endpoint_env_name(const std::string& model_id);

// Live objects built from a config.
struct Resources {
  ProviderMap providers;
  std::vector<std::shared_ptr<const WordVectorModel>> word_vector_models;
  std::shared_ptr<const TaggerProvider> tagger;
  std::shared_ptr<const ConceptProvider> concepts;  // null when not configured
  PreprocessOptions preprocess;
  ExpansionConfig expansion;

  std::vector<const WordVectorModel*> word_models() const;
};

// Models are restricted to `model_ids` when non-empty.
Resources build_resources(const PipelineConfig& c,
                          const std::vector<std::string>& model_ids = {});

const DatasetSpec& dataset_spec(const PipelineConfig& c, const std::string& name);
std::vector<AnnotatedSentence> load_training(const DatasetSpec& spec, const Resources& r);
EvalDataset load_dataset(const std::string& id, const DatasetSpec& spec, const Resources& r);

}  // namespace causalmine

#endif  // CAUSALMINE_CONFIG_H_

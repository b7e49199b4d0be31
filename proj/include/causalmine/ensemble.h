#ifndef CAUSALMINE_ENSEMBLE_H_
#define CAUSALMINE_ENSEMBLE_H_

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causalmine/embedding.h"
#include "causalmine/patterns.h"
#include "causalmine/vector_store.h"

namespace causalmine {

struct ModelVerdict {
  std::string model_id;
  bool flagged = false;
  // NaN when the store has nothing searchable.
  double best_score = 0.0;
  std::optional<std::string> matched_quad_id;
};

struct EnsembleConfig {
  double classification_threshold = 0.85;
  int degree_threshold = 4;
  std::vector<std::string> model_ids;

  void validate() const;
};

struct EnsembleDecision {
  bool causal = false;
  int degree = 0;
  double confidence = 0.0;  // mean best score of flagged models; 0 if none
  std::vector<ModelVerdict> verdicts;
};

using StoreMap = std::map<std::string, VectorStore>;
using ProviderMap = std::map<std::string, std::shared_ptr<const EmbeddingProvider>>;
// model_id -> one row per phrase
using EmbeddingsByModel = std::map<std::string, EmbeddingMatrix>;

ModelVerdict classify_single(const VectorStore& store, std::span<const float> candidate,
                             double threshold);

// Number of flagged verdicts. Duplicate model ids are an error.
int intersection_degree(const std::vector<ModelVerdict>& verdicts);

// Causal iff degree >= degree_threshold.
EnsembleDecision ensemble_vote(std::vector<ModelVerdict> verdicts, const EnsembleConfig& config);

// Embeds every phrase under every configured model. Any provider failure is
// rethrown as kClassificationIncomplete; no partial panel is returned.
EmbeddingsByModel embed_for_panel(std::span<const std::string> phrases,
                                  const ProviderMap& providers,
                                  const std::vector<std::string>& model_ids);

// Votes every row of `embeddings` against the configured stores.
std::vector<EnsembleDecision> classify_embedded(const EmbeddingsByModel& embeddings,
                                                const StoreMap& stores,
                                                const EnsembleConfig& config);

// One candidate end to end: embed per model, classify per model, vote.
std::optional<CausalQuad> ensemble_classify(const CandidateTriple& candidate,
                                            const StoreMap& stores,
                                            const ProviderMap& providers,
                                            const EnsembleConfig& config,
                                            EnsembleDecision* decision = nullptr);

}  // namespace causalmine

#endif  // CAUSALMINE_ENSEMBLE_H_

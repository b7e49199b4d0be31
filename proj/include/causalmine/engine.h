#ifndef CAUSALMINE_ENGINE_H_
#define CAUSALMINE_ENGINE_H_

#include <string>
#include <vector>

#include "causalmine/ensemble.h"
#include "causalmine/expand.h"
#include "causalmine/feedback.h"
#include "causalmine/patterns.h"

namespace causalmine {

struct TrainingSet {
  std::vector<CausalQuad> seeds;
  std::vector<CausalQuad> quads;  // expanded and filtered; what gets embedded
};

// Seeds from the causal sentences only, then expansion and the quad filter.
TrainingSet build_training_set(const std::vector<AnnotatedSentence>& annotated,
                               const ExpansionConfig& expansion,
                               const std::vector<const WordVectorModel*>& word_models,
                               double quad_filter_threshold);

std::string training_quad_id(std::size_t index);

// One store per model over the same quads. Provider failures propagate.
StoreMap build_stores(const std::vector<CausalQuad>& quads, const ProviderMap& providers,
                      const std::vector<std::string>& model_ids,
                      std::size_t bin_size = kDefaultBinSize);

// Stable id derived from the phrase: "q" + 16 hex digits (FNV-1a 64).
std::string quad_id_for(const std::string& phrase);

struct Candidate {
  std::string quad_id;
  CausalQuad quad;  // provenance kPredicted, confidence 1 until classified
  std::vector<std::string> sentence_ids;
  std::string context;  // surface text of the first sentence it came from
};

// Candidate triples of every sentence, deduplicated on the phrase in order
// of first occurrence.
std::vector<Candidate> collect_candidates(const std::vector<TaggedSentence>& sentences);

struct Prediction {
  Candidate candidate;
  EnsembleDecision decision;
  bool blocklisted = false;

  bool causal() const { return decision.causal && !blocklisted; }
};

// Embeds all candidates per model, votes, then applies the blocklist (if
// any): a blocklisted candidate is never causal whatever the vote says.
std::vector<Prediction> classify_candidates(const std::vector<Candidate>& candidates,
                                            const StoreMap& stores, const ProviderMap& providers,
                                            const EnsembleConfig& config,
                                            const Blocklist* blocklist = nullptr,
                                            double blocklist_threshold = 0.85);

}  // namespace causalmine

#endif  // CAUSALMINE_ENGINE_H_

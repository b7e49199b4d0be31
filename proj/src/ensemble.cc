#include "causalmine/ensemble.h"

#include <cmath>
#include <limits>
#include <set>

#include "causalmine/error.h"

namespace causalmine {

void EnsembleConfig::validate() const {
  if (model_ids.empty()) throw Error(ErrorCode::kInvalidArgument, "ensemble needs at least one model");
  std::set<std::string> unique(model_ids.begin(), model_ids.end());
  if (unique.size() != model_ids.size()) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate model id in ensemble panel");
  }
  if (degree_threshold < 1) {
    throw Error(ErrorCode::kInvalidArgument, "degree_threshold must be at least 1");
  }
}

ModelVerdict classify_single(const VectorStore& store, std::span<const float> candidate,
                             double threshold) {
  ModelVerdict v;
  v.model_id = store.model_id();
  auto hit = store.best_match(candidate);
  if (!hit) {
    v.best_score = std::numeric_limits<double>::quiet_NaN();
    return v;
  }
  v.best_score = hit->score;
  v.matched_quad_id = hit->quad_id;
  v.flagged = hit->score >= threshold;
  return v;
}

int intersection_degree(const std::vector<ModelVerdict>& verdicts) {
  std::set<std::string> seen;
  int degree = 0;
  for (const auto& v : verdicts) {
    if (!seen.insert(v.model_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate verdict for model " + v.model_id);
    }
    if (v.flagged) ++degree;
  }
  return degree;
}

EnsembleDecision ensemble_vote(std::vector<ModelVerdict> verdicts, const EnsembleConfig& config) {
  EnsembleDecision d;
  d.degree = intersection_degree(verdicts);
  d.causal = d.degree >= config.degree_threshold;
  if (d.degree > 0) {
    double sum = 0.0;
    for (const auto& v : verdicts) {
      if (v.flagged) sum += v.best_score;
    }
    d.confidence = sum / d.degree;
  }
  d.verdicts = std::move(verdicts);
  return d;
}

EmbeddingsByModel embed_for_panel(std::span<const std::string> phrases,
                                  const ProviderMap& providers,
                                  const std::vector<std::string>& model_ids) {
  EmbeddingsByModel out;
  for (const auto& id : model_ids) {
    auto it = providers.find(id);
    if (it == providers.end() || !it->second) {
      throw Error(ErrorCode::kClassificationIncomplete, "no embedding provider for model " + id);
    }
    try {
      out.emplace(id, embed_phrases(*it->second, phrases));
    } catch (const Error& e) {
      throw Error(ErrorCode::kClassificationIncomplete,
                  "model " + id + ": " + std::string(error_code_name(e.code())) + ": " + e.what());
    }
  }
  return out;
}

std::vector<EnsembleDecision> classify_embedded(const EmbeddingsByModel& embeddings,
                                                const StoreMap& stores,
                                                const EnsembleConfig& config) {
  config.validate();
  std::size_t rows = 0;
  bool first = true;
  for (const auto& id : config.model_ids) {
    auto e = embeddings.find(id);
    if (e == embeddings.end()) {
      throw Error(ErrorCode::kClassificationIncomplete, "no embeddings for model " + id);
    }
    if (stores.find(id) == stores.end()) {
      throw Error(ErrorCode::kPreconditionFailed, "no trained store for model " + id);
    }
    if (!first && e->second.rows() != rows) {
      throw Error(ErrorCode::kInvalidArgument, "models disagree on candidate count");
    }
    rows = e->second.rows();
    first = false;
  }
  std::vector<EnsembleDecision> out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<ModelVerdict> verdicts;
    verdicts.reserve(config.model_ids.size());
    for (const auto& id : config.model_ids) {
      verdicts.push_back(classify_single(stores.at(id), embeddings.at(id).row(r),
                                         config.classification_threshold));
    }
    out.push_back(ensemble_vote(std::move(verdicts), config));
  }
  return out;
}

std::optional<CausalQuad> ensemble_classify(const CandidateTriple& candidate,
                                            const StoreMap& stores,
                                            const ProviderMap& providers,
                                            const EnsembleConfig& config,
                                            EnsembleDecision* decision) {
  config.validate();
  CausalQuad quad = to_quad(candidate, 0.0, Provenance::kPredicted);
  std::vector<std::string> phrases{quad.phrase()};
  auto embedded = embed_for_panel(phrases, providers, config.model_ids);
  auto decisions = classify_embedded(embedded, stores, config);
  if (decision != nullptr) *decision = decisions.front();
  if (!decisions.front().causal) return std::nullopt;
  quad.confidence = decisions.front().confidence;
  return quad;
}

}  // namespace causalmine

#include "causalmine/engine.h"

#include <cstdio>
#include <unordered_map>

#include "causalmine/error.h"

namespace causalmine {

TrainingSet build_training_set(const std::vector<AnnotatedSentence>& annotated,
                               const ExpansionConfig& expansion,
                               const std::vector<const WordVectorModel*>& word_models,
                               double quad_filter_threshold) {
  expansion.validate();
  if (!(quad_filter_threshold >= 0.0 && quad_filter_threshold <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "quad filter threshold must lie in [0, 1]");
  TrainingSet out;
  for (const AnnotatedSentence& s : annotated) {
    if (!s.is_causal()) continue;
    for (CausalQuad& q : extract_training_quads(s)) out.seeds.push_back(std::move(q));
  }
  out.quads = filter_quads(generate_expanded_quads(out.seeds, expansion, word_models),
                           quad_filter_threshold);
  return out;
}

std::string training_quad_id(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "train-%07zu", index);
  return buf;
}

StoreMap build_stores(const std::vector<CausalQuad>& quads, const ProviderMap& providers,
                      const std::vector<std::string>& model_ids, std::size_t bin_size) {
  std::vector<std::string> phrases, ids;
  phrases.reserve(quads.size());
  for (std::size_t i = 0; i < quads.size(); ++i) {
    phrases.push_back(quads[i].phrase());
    ids.push_back(training_quad_id(i));
  }
  StoreMap stores;
  for (const std::string& m : model_ids) {
    validate_model_id(m);
    auto it = providers.find(m);
    if (it == providers.end() || !it->second)
      throw Error(ErrorCode::kInvalidArgument, "no embedding provider for model '" + m + "'");
    EmbeddingMatrix emb = phrases.empty() ? EmbeddingMatrix(0, it->second->dimension())
                                          : embed_phrases(*it->second, phrases);
    stores.emplace(m, VectorStore::build(m, emb, ids, bin_size));
  }
  return stores;
}

std::string quad_id_for(const std::string& phrase) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : phrase) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "q%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<Candidate> collect_candidates(const std::vector<TaggedSentence>& sentences) {
  std::vector<Candidate> out;
  std::unordered_map<std::string, std::size_t> index;
  for (const TaggedSentence& s : sentences) {
    for (const CandidateTriple& t : extract_candidate_triples(s)) {
      CausalQuad q = to_quad(t, 1.0, Provenance::kPredicted);
      const std::string phrase = q.phrase();
      auto [it, fresh] = index.emplace(phrase, out.size());
      if (fresh) {
        Candidate c;
        c.quad_id = quad_id_for(phrase);
        c.quad = std::move(q);
        c.context = s.raw_text;
        out.push_back(std::move(c));
      }
      auto& ids = out[it->second].sentence_ids;
      if (ids.empty() || ids.back() != s.sentence_id) ids.push_back(s.sentence_id);
    }
  }
  return out;
}

std::vector<Prediction> classify_candidates(const std::vector<Candidate>& candidates,
                                            const StoreMap& stores, const ProviderMap& providers,
                                            const EnsembleConfig& config,
                                            const Blocklist* blocklist,
                                            double blocklist_threshold) {
  config.validate();
  std::vector<Prediction> out;
  if (candidates.empty()) return out;
  std::vector<std::string> phrases;
  phrases.reserve(candidates.size());
  for (const Candidate& c : candidates) phrases.push_back(c.quad.phrase());

  const EmbeddingsByModel emb = embed_for_panel(phrases, providers, config.model_ids);
  std::vector<EnsembleDecision> decisions = classify_embedded(emb, stores, config);
  std::vector<bool> blocked(candidates.size(), false);
  if (blocklist && blocklist->size() > 0)
    blocked = blocklist_mask(emb, *blocklist, blocklist_threshold);

  out.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    Prediction p;
    p.candidate = candidates[i];
    p.decision = std::move(decisions[i]);
    p.blocklisted = blocked[i];
    p.candidate.quad.confidence = p.decision.confidence;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace causalmine

#include <gtest/gtest.h>

#include <cmath>

#include "causalmine/concepts.h"
#include "causalmine/ensemble.h"
#include "causalmine/error.h"

namespace cm = causalmine;

namespace {

cm::EmbeddingMatrix matrix(const std::vector<std::vector<float>>& rows) {
  cm::EmbeddingMatrix m(0, rows[0].size());
  for (const auto& r : rows) m.append(r);
  return m;
}

std::vector<float> at_cos(double c) {
  return {static_cast<float>(c), static_cast<float>(std::sqrt(1 - c * c)), 0, 0};
}

std::vector<cm::ModelVerdict> verdicts(const std::vector<bool>& flags, const std::vector<double>& scores = {}) {
  std::vector<cm::ModelVerdict> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    cm::ModelVerdict v;
    v.model_id = "m" + std::to_string(i + 1);
    v.flagged = flags[i];
    v.best_score = i < scores.size() ? scores[i] : (flags[i] ? 0.9 : 0.1);
    out.push_back(v);
  }
  return out;
}

// Always fails.
class BrokenProvider : public cm::EmbeddingProvider {
 public:
  const std::string& provider_id() const override { return id_; }
  cm::ProviderKind kind() const override { return cm::ProviderKind::kHttpService; }
  std::size_t dimension() const override { return 4; }
  cm::EmbeddingMatrix embed(std::span<const std::string>) const override {
    throw cm::Error(cm::ErrorCode::kProviderUnavailable, "down");
  }

 private:
  std::string id_ = "broken";
};

}  // namespace

TEST(ClassifySingle, SelfAndOrthogonal) {
  auto s = cm::VectorStore::build("m", matrix({{1, 0, 0, 0}, {0, 1, 0, 0}}), {"a", "b"});
  const float self[4] = {0, 1, 0, 0};
  const auto v = cm::classify_single(s, self, 0.85);
  EXPECT_TRUE(v.flagged);
  EXPECT_DOUBLE_EQ(v.best_score, 1.0);
  EXPECT_EQ(v.matched_quad_id, "b");
  const float orth[4] = {0, 0, 1, 0};
  EXPECT_FALSE(cm::classify_single(s, orth, 0.85).flagged);
}

TEST(ClassifySingle, HandBuiltStore) {
  auto s = cm::VectorStore::build("m", matrix({at_cos(0.10), at_cos(0.87), at_cos(0.50), at_cos(0.84)}),
                                  {"a", "b", "c", "d"});
  const float q[4] = {1, 0, 0, 0};
  const auto v = cm::classify_single(s, q, 0.85);
  EXPECT_TRUE(v.flagged);
  EXPECT_NEAR(v.best_score, 0.87, 1e-6);
  EXPECT_EQ(v.matched_quad_id, "b");
}

TEST(ClassifySingle, EmptyStoreSentinel) {
  cm::VectorStore s("m", 4);
  const float q[4] = {1, 0, 0, 0};
  const auto v = cm::classify_single(s, q, 0.85);
  EXPECT_FALSE(v.flagged);
  EXPECT_TRUE(std::isnan(v.best_score));
}

TEST(Degree, Counts) {
  EXPECT_EQ(cm::intersection_degree(verdicts({1, 1, 1, 1, 1, 1})), 6);
  EXPECT_EQ(cm::intersection_degree(verdicts({0, 0, 0, 0, 0, 0})), 0);
  EXPECT_EQ(cm::intersection_degree(verdicts({1, 0, 1, 0, 1, 0})), 3);
  auto dup = verdicts({1, 1});
  dup[1].model_id = dup[0].model_id;
  EXPECT_THROW(cm::intersection_degree(dup), cm::Error);
}

TEST(Vote, Thresholds) {
  cm::EnsembleConfig cfg;
  EXPECT_TRUE(cm::ensemble_vote(verdicts({1, 1, 1, 1, 1, 1}), cfg).causal);
  EXPECT_FALSE(cm::ensemble_vote(verdicts({1, 1, 1, 0, 0, 0}), cfg).causal);
  const auto d = cm::ensemble_vote(verdicts({1, 1, 1, 1, 0, 0}, {0.90, 0.88, 0.86, 0.92, 0.2, 0.1}), cfg);
  EXPECT_TRUE(d.causal);
  EXPECT_EQ(d.degree, 4);
  EXPECT_NEAR(d.confidence, 0.89, 1e-12);
}

TEST(Panel, ProviderFailureIsIncomplete) {
  cm::ProviderMap providers{{"m1", std::make_shared<BrokenProvider>()}};
  const std::vector<std::string> phrases{"a b c"};
  try {
    cm::embed_for_panel(phrases, providers, {"m1"});
    FAIL();
  } catch (const cm::Error& e) {
    EXPECT_EQ(e.code(), cm::ErrorCode::kClassificationIncomplete);
  }
}

TEST(Panel, EndToEndWithHashedProviders) {
  cm::ProviderMap providers;
  cm::StoreMap stores;
  cm::EnsembleConfig cfg;
  cfg.degree_threshold = 2;
  const std::vector<std::string> train{"smoking cause cancer"};
  for (const std::string id : {"m1", "m2", "m3"}) {
    auto p = std::make_shared<cm::HashedEmbeddingProvider>(id, 64, "seed-" + id);
    providers[id] = p;
    stores.emplace(id, cm::VectorStore::build(id, cm::embed_phrases(*p, train), {"t0"}));
    cfg.model_ids.push_back(id);
  }
  cm::CandidateTriple c;
  c.subject.lemmas = {"smoking"};
  c.trigger = "cause";
  c.object.lemmas = {"cancer"};
  cm::EnsembleDecision d;
  const auto q = cm::ensemble_classify(c, stores, providers, cfg, &d);
  ASSERT_TRUE(q);
  EXPECT_EQ(d.degree, 3);
  EXPECT_EQ(q->provenance, cm::Provenance::kPredicted);
  EXPECT_NEAR(q->confidence, 1.0, 1e-6);

  c.subject.lemmas = {"dog"};
  c.trigger = "chase";
  c.object.lemmas = {"cat"};
  EXPECT_FALSE(cm::ensemble_classify(c, stores, providers, cfg));
}

// --- concepts ---------------------------------------------------------------

namespace {

cm::DictionaryConceptProvider dictionary() {
  cm::DictionaryConceptProvider d;
  d.add("cancer", {"C0006826", "Malignant neoplasm", {"T191"}, ""});
  d.add("fever", {"C0015967", "Fever", {"T184"}, ""});
  return d;
}

class FailingConcepts : public cm::ConceptProvider {
 public:
  std::vector<cm::ConceptAnnotation> exact(const std::string&) const override {
    throw cm::Error(cm::ErrorCode::kProviderUnavailable, "down");
  }
};

}  // namespace

TEST(Concepts, ExactSubspanMiss) {
  const auto d = dictionary();
  const auto hit = cm::lookup_concepts("Cancer", d);
  ASSERT_EQ(hit.size(), 1u);
  EXPECT_EQ(hit[0].cui, "C0006826");
  const auto sub = cm::lookup_concepts("severe cancer", d);
  ASSERT_EQ(sub.size(), 1u);
  EXPECT_EQ(sub[0].matched_text, "cancer");
  EXPECT_TRUE(cm::lookup_concepts("widget", d).empty());
}

TEST(Concepts, EnrichAndFilter) {
  const auto d = dictionary();
  std::vector<cm::CausalQuad> qs{{"cancer", "cause", "widget"},
                                 {"foo", "cause", "bar"},
                                 {"infection", "cause", "high fever"}};
  const auto out = cm::enrich_and_filter(qs, d);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].quad.subject, "cancer");
  EXPECT_EQ(out[0].subject_concepts.size(), 1u);
  EXPECT_TRUE(out[0].object_concepts.empty());
  EXPECT_EQ(out[1].quad.object, "high fever");
  EXPECT_EQ(cm::enrich(out[1], d).object_concepts, out[1].object_concepts);
}

TEST(Concepts, ProviderFailure) {
  try {
    cm::enrich_and_filter({{"a", "b", "c"}}, FailingConcepts());
    FAIL();
  } catch (const cm::Error& e) {
    EXPECT_EQ(e.code(), cm::ErrorCode::kEnrichmentIncomplete);
  }
}

TEST(Concepts, CacheServesRepeatLookups) {
  struct Counting : cm::ConceptProvider {
    mutable int calls = 0;
    std::vector<cm::ConceptAnnotation> exact(const std::string&) const override {
      ++calls;
      return {};
    }
  };
  auto inner = std::make_shared<Counting>();
  cm::CachingConceptProvider cache(inner);
  cache.exact("Cancer");
  cache.exact("cancer");
  EXPECT_EQ(inner->calls, 1);
}

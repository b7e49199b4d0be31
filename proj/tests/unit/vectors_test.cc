#include <gtest/gtest.h>

#include <memory>

#include "causalmine/embedding.h"
#include "causalmine/error.h"
#include "causalmine/expand.h"
#include "causalmine/vectors.h"
#include "support/helpers.h"

namespace cm = causalmine;

namespace {

cm::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const cm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return cm::ErrorCode::kIo;
}

std::shared_ptr<cm::WordVectorModel> model_with(const std::string& id,
                                                std::vector<std::pair<std::string, std::vector<float>>> rows) {
  auto m = std::make_shared<cm::WordVectorModel>(id, rows.front().second.size());
  for (auto& [w, v] : rows) m->add(w, v);
  return m;
}

}  // namespace

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cm::cosine_similarity(std::vector<double>{3, 4}, std::vector<double>{3, 4}), 1.0);
  EXPECT_DOUBLE_EQ(cm::cosine_similarity(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 0.0);
  EXPECT_NEAR(cm::cosine_similarity(std::vector<double>{1, 2, 2}, std::vector<double>{2, 1, 2}),
              8.0 / 9.0, 1e-12);
}

TEST(Cosine, Errors) {
  EXPECT_EQ(code_of([] { cm::cosine_similarity(std::vector<float>{0, 0}, std::vector<float>{1, 0}); }),
            cm::ErrorCode::kUndefinedSimilarity);
  EXPECT_EQ(code_of([] { cm::cosine_similarity(std::vector<float>{1}, std::vector<float>{1, 0}); }),
            cm::ErrorCode::kDimensionMismatch);
}

TEST(WordVectors, ParseAndNeighbours) {
  const auto m = cm::WordVectorModel::parse(
      "4 2\ncause 1 0\nTrigger 0.9 0.1\nlead 0.6 0.8\nsit 0 1\n", "w");
  EXPECT_EQ(m.size(), 4u);
  EXPECT_EQ(m.dimension(), 2u);
  EXPECT_TRUE(m.contains("trigger"));
  const auto nb = m.most_similar("cause", 10, 0.5);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0].first, "trigger");
  EXPECT_EQ(nb[1].first, "lead");
  EXPECT_NEAR(nb[1].second, 0.6, 1e-6);
  EXPECT_EQ(m.most_similar("cause", 1, 0.5).size(), 1u);
  EXPECT_TRUE(m.most_similar("unknown", 10, 0.5).empty());
}

TEST(WordVectors, MalformedFile) {
  EXPECT_THROW(cm::WordVectorModel::parse("2 3\na 1 2\n", "w"), cm::Error);
}

TEST(Embed, AverageProviderMean) {
  auto m = model_with("w", {{"a", {1, 0}}, {"b", {0, 1}}});
  cm::WordVectorAverageProvider p("avg", m);
  const std::vector<std::string> phrases{"a b"};
  const auto e = cm::embed_phrases(p, phrases);
  ASSERT_EQ(e.rows(), 1u);
  EXPECT_FLOAT_EQ(e.row(0)[0], 0.5f);
  EXPECT_FLOAT_EQ(e.row(0)[1], 0.5f);
}

TEST(Embed, AverageProviderAllUnknown) {
  auto m = model_with("w", {{"a", {1, 0}}});
  cm::WordVectorAverageProvider p("avg", m);
  const std::vector<std::string> phrases{"zz yy"};
  EXPECT_EQ(code_of([&] { cm::embed_phrases(p, phrases); }), cm::ErrorCode::kAllTokensUnknown);
}

TEST(Embed, FileProvider) {
  testing_support::TempDir dir;
  testing_support::write_file(dir.file("e.jsonl"),
                              "{\"phrase\": \"smoking cause cancer\", \"vector\": [0.25, -1.5, 3]}\n");
  const auto p = cm::PrecomputedFileProvider::load(dir.file("e.jsonl"), "f");
  EXPECT_EQ(p->dimension(), 3u);
  const std::vector<std::string> hit{"smoking cause cancer"};
  const auto e = cm::embed_phrases(*p, hit);
  EXPECT_FLOAT_EQ(e.row(0)[0], 0.25f);
  EXPECT_FLOAT_EQ(e.row(0)[1], -1.5f);
  EXPECT_FLOAT_EQ(e.row(0)[2], 3.0f);
  const std::vector<std::string> miss{"nothing here"};
  EXPECT_EQ(code_of([&] { cm::embed_phrases(*p, miss); }), cm::ErrorCode::kUnknownPhrase);
}

TEST(Embed, HashedIsDeterministicAndSeeded) {
  cm::HashedEmbeddingProvider a("a", 32, "s1"), a2("a", 32, "s1"), b("b", 32, "s2");
  const std::vector<std::string> ph{"smoking cause cancer", "dog chase cat"};
  const auto ea = cm::embed_phrases(a, ph), ea2 = cm::embed_phrases(a2, ph), eb = cm::embed_phrases(b, ph);
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(ea.row(0)[i], ea2.row(0)[i]);
  EXPECT_NE(cm::cosine_similarity(ea.row(0), eb.row(0)), 1.0);
  EXPECT_LT(std::abs(cm::cosine_similarity(ea.row(0), ea.row(1))), 0.85);
}

TEST(Expand, AbsentTermEmpty) {
  auto m = model_with("w", {{"a", {1, 0}}});
  cm::ExpansionConfig cfg;
  EXPECT_TRUE(cm::expand_term("zzz", cfg, {m.get()}).empty());
}

TEST(Expand, DedupKeepsMaxAndSynonyms) {
  // cos(t, x) = 0.6 in each of three models
  std::vector<std::shared_ptr<cm::WordVectorModel>> models;
  for (int i = 0; i < 3; ++i)
    models.push_back(model_with("w" + std::to_string(i), {{"t", {1, 0}}, {"x", {0.6f, 0.8f}}}));
  cm::ExpansionConfig cfg;
  cfg.synonyms.add("t", "y");
  const auto out = cm::expand_term("t", cfg, {models[0].get(), models[1].get(), models[2].get()});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].term, "x");
  EXPECT_NEAR(out[0].confidence, 0.6, 1e-6);
  EXPECT_EQ(out[1].term, "y");
  EXPECT_DOUBLE_EQ(out[1].confidence, 1.0);
  EXPECT_TRUE(out[1].from_synonym);
}

TEST(Expand, SeedWithoutExpansionsIsIdentity) {
  cm::CausalQuad seed{"a", "v", "b", 1.0, cm::Provenance::kSeed};
  const auto out = cm::generate_expanded_quads({seed}, cm::ExpansionConfig(), {});
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].phrase(), "a v b");
  EXPECT_DOUBLE_EQ(out[0].confidence, 1.0);
}

TEST(Expand, CartesianConfidences) {
  // subject a -> a2 (0.9), trigger v -> v2 (0.8), object b: no neighbour
  auto m = model_with("w", {{"a", {1, 0, 0, 0}},
                            {"a2", {0.9f, std::sqrt(1 - 0.81f), 0, 0}},
                            {"v", {0, 0, 1, 0}},
                            {"v2", {0, 0, 0.8f, 0.6f}},
                            {"b", {0, -1, 0, 0}}});
  cm::CausalQuad seed{"a", "v", "b", 1.0, cm::Provenance::kSeed};
  const auto out = cm::generate_expanded_quads({seed}, cm::ExpansionConfig(), {m.get()});
  std::map<std::string, double> got;
  for (const auto& q : out) got[q.phrase()] = q.confidence;
  ASSERT_EQ(got.size(), 4u);
  EXPECT_NEAR(got["a v b"], 1.0, 1e-6);
  EXPECT_NEAR(got["a2 v b"], 0.9, 1e-6);
  EXPECT_NEAR(got["a v2 b"], 0.8, 1e-6);
  EXPECT_NEAR(got["a2 v2 b"], 0.72, 1e-6);
  for (const auto& q : out)
    EXPECT_EQ(q.provenance, q.phrase() == "a v b" ? cm::Provenance::kSeed : cm::Provenance::kExpanded);
}

TEST(Filter, Threshold) {
  std::vector<cm::CausalQuad> qs{{"q", "v", "o", 0.72}, {"r", "v", "o", 0.4}};
  const auto out = cm::filter_quads(qs, 0.5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].subject, "q");
  EXPECT_EQ(cm::filter_quads(qs, 0.0).size(), 2u);
  std::vector<cm::CausalQuad> seeds{{"a", "v", "b", 1.0}, {"c", "v", "d", 1.0}};
  EXPECT_EQ(cm::filter_quads(seeds, 1.0).size(), 2u);
}

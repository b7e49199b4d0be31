#include <gtest/gtest.h>

#include <cmath>

#include "causalmine/error.h"
#include "causalmine/feedback.h"
#include "support/helpers.h"

namespace cm = causalmine;

namespace {

std::vector<float> at_cos(double c) {
  return {static_cast<float>(c), static_cast<float>(std::sqrt(1 - c * c)), 0};
}

cm::FeedbackVerdict verdict(const std::string& q, cm::Verdict v, const std::string& expert,
                            cm::Timestamp ts) {
  cm::FeedbackVerdict f;
  f.quad_id = q;
  f.verdict = v;
  f.expert_id = expert;
  f.timestamp = ts;
  return f;
}

cm::ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const cm::Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return cm::ErrorCode::kIo;
}

class BrokenProvider : public cm::EmbeddingProvider {
 public:
  const std::string& provider_id() const override { return id_; }
  cm::ProviderKind kind() const override { return cm::ProviderKind::kHttpService; }
  std::size_t dimension() const override { return 3; }
  cm::EmbeddingMatrix embed(std::span<const std::string>) const override {
    throw cm::Error(cm::ErrorCode::kProviderUnavailable, "down");
  }

 private:
  std::string id_ = "broken";
};

}  // namespace

TEST(Timestamps, RoundTrip) {
  const auto ts = cm::parse_iso8601("2024-03-01T12:30:45.250Z");
  EXPECT_EQ(cm::format_iso8601(ts), "2024-03-01T12:30:45.250Z");
  EXPECT_EQ(cm::parse_iso8601("2024-03-01T14:30:45.250+02:00"), ts);
  EXPECT_EQ(cm::parse_iso8601("1970-01-01T00:00:01Z"), 1000);
  EXPECT_THROW(cm::parse_iso8601("yesterday"), cm::Error);
}

TEST(Verdicts, JsonRoundTrip) {
  auto v = verdict("q1", cm::Verdict::kNonCausal, "e1", 1000);
  v.note = "not causal";
  v.confidence_override = 0.25;
  const auto back = cm::verdict_from_json(cm::to_json(v));
  EXPECT_EQ(back.quad_id, "q1");
  EXPECT_EQ(back.verdict, cm::Verdict::kNonCausal);
  EXPECT_EQ(back.note, "not causal");
  EXPECT_EQ(back.confidence_override, 0.25);
  EXPECT_EQ(code_of([] { cm::verdict_from_json(nlohmann::json{{"quad_id", "q1"}}); }),
            cm::ErrorCode::kMalformedInput);
  EXPECT_EQ(code_of([] {
              cm::verdict_from_json(nlohmann::json{
                  {"quad_id", "q"}, {"verdict", "maybe"}, {"expert_id", "e"}, {"timestamp", "2024-01-01T00:00:00Z"}});
            }),
            cm::ErrorCode::kMalformedInput);
}

TEST(VerdictLog, Supersession) {
  testing_support::TempDir dir;
  const std::set<std::string> known{"q1", "q2"};
  {
    cm::VerdictLog log(dir.file("verdicts.jsonl"));
    cm::submit_verdict(verdict("q1", cm::Verdict::kCausal, "e1", 100), known, log);
    cm::submit_verdict(verdict("q1", cm::Verdict::kNonCausal, "e1", 200), known, log);
    // older timestamp arriving later does not win
    cm::submit_verdict(verdict("q1", cm::Verdict::kCausal, "e1", 150), known, log);
    EXPECT_EQ(code_of([&] { cm::submit_verdict(verdict("q99", cm::Verdict::kCausal, "e1", 1), known, log); }),
              cm::ErrorCode::kNotFound);
  }
  cm::VerdictLog reopened(dir.file("verdicts.jsonl"));
  EXPECT_EQ(reopened.size(), 3u);
  const auto latest = reopened.latest();
  ASSERT_EQ(latest.size(), 1u);
  EXPECT_EQ(latest[0].verdict, cm::Verdict::kNonCausal);
  EXPECT_EQ(reopened.effective().at("q1").timestamp, 200);
}

TEST(VerdictLog, EffectiveAcrossExperts) {
  testing_support::TempDir dir;
  cm::VerdictLog log(dir.file("v.jsonl"));
  log.append(verdict("q1", cm::Verdict::kCausal, "a", 300));
  log.append(verdict("q1", cm::Verdict::kNonCausal, "b", 200));
  EXPECT_EQ(log.effective().at("q1").verdict, cm::Verdict::kCausal);
}

TEST(Blocklist, FilterHandComputed) {
  cm::Blocklist bl;
  cm::BlocklistEntry e;
  e.phrase = "x not y";
  e.embeddings["m"] = {1, 0, 0};
  ASSERT_TRUE(bl.add(e));
  EXPECT_FALSE(bl.add(e));
  std::vector<cm::CausalQuad> preds{{"a", "v", "b"}, {"c", "v", "d"}, {"e", "v", "f"}, {"g", "v", "h"}};
  cm::EmbeddingsByModel emb;
  emb["m"] = cm::EmbeddingMatrix(0, 3);
  for (double c : {0.9, 0.3, 0.86, 0.1}) emb["m"].append(at_cos(c));
  const auto kept = cm::blocklist_filter(preds, emb, bl);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].subject, "c");
  EXPECT_EQ(kept[1].subject, "g");
  EXPECT_EQ(cm::blocklist_filter(preds, emb, cm::Blocklist()).size(), 4u);
}

TEST(Blocklist, SaveLoad) {
  testing_support::TempDir dir;
  cm::Blocklist bl;
  cm::BlocklistEntry e;
  e.phrase = "dog chase cat";
  e.quad_id = "q1";
  e.added_at = 5;
  e.embeddings["m1"] = {1, 2};
  e.embeddings["m2"] = {3, 4, 5};
  bl.add(e);
  bl.save(dir.str());
  const auto back = cm::Blocklist::load(dir.str());
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back.entries()[0].embeddings.at("m2"), (std::vector<float>{3, 4, 5}));
  EXPECT_EQ(back.probes("m1", 2).rows(), 1u);
  EXPECT_TRUE(back.contains("dog chase cat"));
}

class ApplyFeedbackTest : public ::testing::Test {
 protected:
  void SetUp() override {
    // the probe phrases sit at (1,0,0) and (0,0,1); 3 of the 10 entries are within 0.85
    auto p = std::make_shared<cm::PrecomputedFileProvider>("m", 3);
    const float a[3] = {1, 0, 0}, b[3] = {0, 0, 1}, c[3] = {0, 1, 0};
    p->add("bad cause one", a);
    p->add("bad cause two", b);
    p->add("good cause one", c);
    providers["m"] = p;
    cm::EmbeddingMatrix rows(0, 3);
    for (double x : {0.9, 0.2, 0.5, 0.86, 0.1, 0.3, 0.84, 0.0, 0.6, 0.4}) rows.append(at_cos(x));
    rows.append(std::vector<float>{0.1f, 0.0f, 0.99f});
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < rows.rows(); ++i) ids.push_back("t" + std::to_string(i));
    stores.emplace("m", cm::VectorStore::build("m", rows, ids));
    quads["q1"] = cm::CausalQuad{"bad", "cause", "one", 1.0, cm::Provenance::kPredicted};
    quads["q2"] = cm::CausalQuad{"bad", "cause", "two", 1.0, cm::Provenance::kPredicted};
    quads["q3"] = cm::CausalQuad{"good", "cause", "one", 1.0, cm::Provenance::kPredicted};
  }

  cm::ProviderMap providers;
  cm::StoreMap stores;
  std::map<std::string, cm::CausalQuad> quads;
  cm::Blocklist blocklist;
};

TEST_F(ApplyFeedbackTest, NoVerdicts) {
  const auto r = cm::apply_feedback({}, quads, stores, blocklist, providers, {"m"});
  EXPECT_EQ(r.appended, 0u);
  EXPECT_EQ(r.blocklisted, 0u);
  EXPECT_EQ(stores.at("m").count_active(), 11u);
}

TEST_F(ApplyFeedbackTest, NonCausalPurges) {
  // brute force: 0.9, 0.86 to probe a; (0.1,0,0.99) to probe b
  const auto r = cm::apply_feedback({verdict("q1", cm::Verdict::kNonCausal, "e", 1),
                                     verdict("q2", cm::Verdict::kNonCausal, "e", 2)},
                                    quads, stores, blocklist, providers, {"m"});
  EXPECT_EQ(r.blocklisted, 2u);
  EXPECT_EQ(r.removed_per_model.at("m"), 3u);
  EXPECT_FALSE(stores.at("m").is_active(0));
  EXPECT_FALSE(stores.at("m").is_active(3));
  EXPECT_FALSE(stores.at("m").is_active(10));
  EXPECT_EQ(blocklist.size(), 2u);
}

TEST_F(ApplyFeedbackTest, CausalAppendedAndFindable) {
  const auto r = cm::apply_feedback({verdict("q3", cm::Verdict::kCausal, "e", 1)}, quads, stores,
                                    blocklist, providers, {"m"});
  EXPECT_EQ(r.appended, 1u);
  EXPECT_EQ(r.removed_per_model.at("m"), 0u);
  EXPECT_EQ(stores.at("m").used(), 12u);
  const float q[3] = {0, 1, 0};
  const auto v = cm::classify_single(stores.at("m"), q, 0.85);
  EXPECT_TRUE(v.flagged);
  EXPECT_DOUBLE_EQ(v.best_score, 1.0);
}

TEST_F(ApplyFeedbackTest, AtomicOnProviderFailure) {
  providers["m2"] = std::make_shared<BrokenProvider>();
  stores.emplace("m2", cm::VectorStore("m2", 3));
  EXPECT_THROW(cm::apply_feedback({verdict("q1", cm::Verdict::kNonCausal, "e", 1),
                                   verdict("q3", cm::Verdict::kCausal, "e", 1)},
                                  quads, stores, blocklist, providers, {"m", "m2"}),
               cm::Error);
  EXPECT_EQ(stores.at("m").count_active(), 11u);
  EXPECT_EQ(stores.at("m").used(), 11u);
  EXPECT_EQ(blocklist.size(), 0u);
}

TEST_F(ApplyFeedbackTest, UnknownQuad) {
  EXPECT_EQ(code_of([&] {
              cm::apply_feedback({verdict("nope", cm::Verdict::kCausal, "e", 1)}, quads, stores,
                                 blocklist, providers, {"m"});
            }),
            cm::ErrorCode::kNotFound);
}

TEST(ApplyFeedback, OneCausalOverSixModels) {
  cm::ProviderMap providers;
  cm::StoreMap stores;
  std::vector<std::string> ids;
  for (int i = 1; i <= 6; ++i) {
    const std::string id = "m" + std::to_string(i);
    providers[id] = std::make_shared<cm::HashedEmbeddingProvider>(id, 16, id);
    stores.emplace(id, cm::VectorStore(id, 16));
    ids.push_back(id);
  }
  std::map<std::string, cm::CausalQuad> quads{{"q", {"smoking", "cause", "cancer"}}};
  cm::Blocklist bl;
  const auto r = cm::apply_feedback({verdict("q", cm::Verdict::kCausal, "e", 1)}, quads, stores, bl,
                                    providers, ids);
  EXPECT_EQ(r.appended, 1u);
  for (const auto& id : ids) {
    EXPECT_EQ(stores.at(id).count_active(), 1u);
    EXPECT_EQ(r.removed_per_model.at(id), 0u);
  }
}

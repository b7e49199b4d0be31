// One line per criterion: "PASS name: detail" or "FAIL name: detail".
// Exit status is non-zero when any selected criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "causalmine/engine.h"
#include "causalmine/error.h"
#include "causalmine/eval.h"
#include "causalmine/patterns.h"
#include "causalmine/pipeline.h"
#include "causalmine/vector_store.h"
#include "causalmine/vectors.h"
#include "support/helpers.h"

namespace cm = causalmine;
namespace ts = testing_support;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int digits = 3) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// "62.5" -> 6250, "06.35" -> 635
std::int64_t hundredths(const std::string& s) {
  const auto dot = s.find('.');
  std::string whole = s.substr(0, dot), frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  frac.resize(2, '0');
  return std::stoll(whole) * 100 + std::stoll(frac);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// --- metric replay ----------------------------------------------------------

Outcome metric_replay() {
  const auto t0 = Clock::now();
  std::ifstream in(ts::fixture("published_metrics.csv"));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  std::vector<std::string> bad;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c = split_csv(line);
    ++rows;
    cm::ConfusionMatrix m;
    m.tp = std::stoull(c[4]);
    m.fn = std::stoull(c[5]);
    m.fp = std::stoull(c[6]);
    m.tn = std::stoull(c[7]);
    const auto got = cm::metrics(m);
    const std::pair<const char*, std::pair<cm::Percent, std::string>> cols[] = {
        {"A", {got.accuracy, c[8]}}, {"P", {got.precision, c[9]}}, {"R", {got.recall, c[10]}}};
    for (const auto& [name, pr] : cols) {
      const auto& [computed, published] = pr;
      if (!computed || std::llabs(*computed - hundredths(published)) > 1)
        bad.push_back(c[0] + "/" + c[1] + " " + name + " computed " + cm::format_percent(computed) +
                      " published " + published);
    }
    if (m.pp() != std::stoull(c[2]) || m.pn() != std::stoull(c[3]))
      bad.push_back(c[0] + "/" + c[1] + " PP/PN inconsistent with cells");
  }
  const double secs = seconds_since(t0);
  std::string detail = std::to_string(rows) + " rows, " + std::to_string(bad.size()) +
                       " mismatches, " + fixed(secs) + " s";
  for (const auto& b : bad) detail += "; " + b;
  return {rows == 48 && bad.empty() && secs < 1.0, detail};
}

// --- store layout -----------------------------------------------------------

Outcome store_layout() {
  const auto t0 = Clock::now();
  const std::size_t n = 1246733, dim = 4;
  cm::VectorStore store("layout", dim, 40000);
  const std::vector<float> zero(dim, 0.0f);
  for (std::size_t i = 0; i < n; ++i) store.append(zero, "z");
  const double secs = seconds_since(t0);
  const bool ok = store.capacity() == 1280000 && store.padding() == 33267 && store.used() == n &&
                  store.bin_count() == 32 && secs < 30.0;
  return {ok, "capacity " + std::to_string(store.capacity()) + ", padding " +
                  std::to_string(store.padding()) + ", bins " + std::to_string(store.bin_count()) +
                  ", float storage " + std::to_string(store.capacity() * dim * sizeof(float)) +
                  " bytes, " + fixed(secs) + " s"};
}

// --- extraction oracle ------------------------------------------------------

Outcome extraction_oracle() {
  std::mt19937_64 rng(20240601);
  std::size_t mismatches = 0, triples = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    const auto s = ts::random_sentence(rng, 8, "r" + std::to_string(i));
    const auto got = cm::extract_candidate_triples(s);
    const auto want = ts::oracle_triples(s);
    triples += want.size();
    bool same = got.size() == want.size();
    for (std::size_t k = 0; same && k < got.size(); ++k)
      same = std::make_tuple(got[k].subject.span.start, got[k].subject.span.end, got[k].trigger_index,
                             got[k].object.span.start, got[k].object.span.end) == want[k] &&
             got[k].trigger == s.tokens[got[k].trigger_index].lemma;
    if (!same) {
      ++mismatches;
      if (first.empty()) {
        for (const auto& t : s.tokens) first += t.surface + (t.is_stopword ? "*" : "") + "/" + t.pos + " ";
      }
    }
  }
  std::string detail = "1000 sentences, " + std::to_string(triples) + " oracle triples, " +
                       std::to_string(mismatches) + " mismatches";
  if (!first.empty()) detail += "; first: " + first;
  return {mismatches == 0 && triples > 0, detail};
}

// --- cosine properties ------------------------------------------------------

Outcome cosine_properties() {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> val(-10, 10), logscale(-3, 3);
  std::bernoulli_distribution sparse(0.2);
  std::size_t failures = 0;
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const int d = dim(rng);
    std::vector<double> u(d), v(d);
    for (int k = 0; k < d; ++k) {
      u[k] = sparse(rng) ? 0.0 : val(rng);
      v[k] = sparse(rng) ? 0.0 : val(rng);
    }
    u[0] = u[0] == 0 ? 1.0 : u[0];
    v[d - 1] = v[d - 1] == 0 ? -1.0 : v[d - 1];
    const double a = std::pow(10.0, logscale(rng));
    std::vector<double> au(u);
    for (auto& x : au) x *= a;
    const double uv = cm::cosine_similarity(u, v), vu = cm::cosine_similarity(v, u);
    const double uu = cm::cosine_similarity(u, u), auv = cm::cosine_similarity(au, v);
    const double oracle = ts::oracle_cosine(u, v);
    const double err = std::max({std::abs(uv - vu), std::abs(uu - 1.0), std::abs(auv - uv),
                                 std::abs(uv - oracle)});
    worst = std::max(worst, err);
    if (uv < -1.0 || uv > 1.0 || err > 1e-9) ++failures;
  }
  char worst_s[32];
  std::snprintf(worst_s, sizeof worst_s, "%.3e", worst);
  return {failures == 0, "10000 pairs, " + std::to_string(failures) + " failures, worst deviation " + worst_s};
}

// --- ensemble monotonicity --------------------------------------------------

Outcome ensemble_monotonicity() {
  const std::size_t dim = 16, models = 6, stored = 60, candidates = 200;
  std::mt19937_64 rng(777);
  std::normal_distribution<float> g;
  std::uniform_real_distribution<float> noise_level(0.0f, 0.9f);
  std::vector<std::vector<float>> concepts(stored, std::vector<float>(dim));
  for (auto& c : concepts)
    for (auto& x : c) x = g(rng);

  cm::StoreMap stores;
  std::vector<std::string> ids;
  for (std::size_t m = 0; m < models; ++m) ids.push_back("m" + std::to_string(m + 1));
  std::vector<std::vector<std::vector<float>>> store_rows(models);
  for (std::size_t m = 0; m < models; ++m) {
    cm::EmbeddingMatrix rows(0, dim);
    std::vector<std::string> qids;
    for (std::size_t i = 0; i < stored; ++i) {
      std::vector<float> r = concepts[i];
      for (auto& x : r) x += 0.2f * g(rng);
      rows.append(r);
      store_rows[m].push_back(r);
      qids.push_back("t" + std::to_string(i));
    }
    stores.emplace(ids[m], cm::VectorStore::build(ids[m], rows, qids, 16));
  }
  // Each candidate is a perturbed concept; the perturbation differs per model
  // so the number of flagging models spreads over 0..6.
  cm::EmbeddingsByModel emb;
  for (const auto& id : ids) emb[id] = cm::EmbeddingMatrix(0, dim);
  for (std::size_t c = 0; c < candidates; ++c) {
    const auto& base = concepts[c % stored];
    for (const auto& id : ids) {
      const float level = noise_level(rng);
      std::vector<float> v = base;
      for (auto& x : v) x += level * g(rng);
      emb[id].append(v);
    }
  }

  std::vector<std::set<std::size_t>> causal(7);
  std::map<int, std::size_t> degree_hist;
  for (int d = 1; d <= 6; ++d) {
    cm::EnsembleConfig cfg;
    cfg.model_ids = ids;
    cfg.degree_threshold = d;
    const auto decisions = cm::classify_embedded(emb, stores, cfg);
    for (std::size_t c = 0; c < decisions.size(); ++c) {
      if (decisions[c].causal) causal[d].insert(c);
      if (d == 1) ++degree_hist[decisions[c].degree];
    }
  }
  bool nested = true;
  for (int d = 1; d <= 5; ++d)
    nested = nested && std::includes(causal[d].begin(), causal[d].end(), causal[d + 1].begin(),
                                     causal[d + 1].end());

  // hand voting at degree 4 on every 10th candidate
  cm::EnsembleConfig cfg4;
  cfg4.model_ids = ids;
  const auto decisions = cm::classify_embedded(emb, stores, cfg4);
  std::size_t spot_mismatch = 0;
  for (std::size_t c = 0; c < candidates; c += 10) {
    int degree = 0;
    double sum = 0;
    for (std::size_t m = 0; m < models; ++m) {
      const auto q = emb[ids[m]].row(c);
      double best = -2;
      for (const auto& r : store_rows[m]) best = std::max(best, ts::oracle_cosine(q, r));
      if (best >= 0.85) {
        ++degree;
        sum += best;
      }
    }
    const bool want = degree >= 4;
    const double conf = degree ? sum / degree : 0.0;
    if (decisions[c].causal != want || decisions[c].degree != degree ||
        std::abs(decisions[c].confidence - conf) > 1e-9)
      ++spot_mismatch;
  }
  std::string hist;
  for (const auto& [d, n] : degree_hist) hist += std::to_string(d) + ":" + std::to_string(n) + " ";
  const bool spread = degree_hist.size() >= 5;
  return {nested && spot_mismatch == 0 && spread,
          std::string("nested ") + (nested ? "yes" : "no") + ", 20 spot checks, " +
              std::to_string(spot_mismatch) + " mismatches, degrees { " + hist + "}, causal at d=1..6: " +
              std::to_string(causal[1].size()) + "/" + std::to_string(causal[2].size()) + "/" +
              std::to_string(causal[3].size()) + "/" + std::to_string(causal[4].size()) + "/" +
              std::to_string(causal[5].size()) + "/" + std::to_string(causal[6].size())};
}

// --- shared fixture for the pipeline criteria -------------------------------

const std::vector<std::string> kNouns = {
    "toxin",   "fever",   "rash",     "pain",    "tumor",    "lesion",   "fatigue",  "edema",
    "anemia",  "nausea",  "headache", "insomnia", "asthma",  "obesity",  "cough",    "burn",
    "injury",  "ulcer",   "clot",     "sepsis",  "hypoxia",  "gout",     "acne",     "plaque",
    "drought", "pollen",  "mold",     "radon",   "smog",     "alcohol",  "tobacco",  "sugar",
    "salt",    "caffeine", "mercury", "noise",   "heat",     "sunlight", "fungus",   "parasite",
    "vitamin", "stress",  "trauma",   "virus",   "bacterium", "allergen", "dust",    "smoke",
    "poison",  "venom",   "lymphoma", "colitis", "hepatitis", "arthritis", "dementia", "seizure",
    "migraine", "vertigo", "tremor",  "spasm",   "fracture", "bruise",   "blister",  "wound",
    "abscess", "cyst",    "polyp",    "hernia",  "cataract", "glaucoma", "tinnitus", "scurvy",
    "rickets", "goiter",  "jaundice", "pallor",  "malaise",  "delirium", "coma",     "shock",
    "chill",   "sweat",   "itch",     "swelling", "bleeding", "bloating", "cramp",   "sputum"};
const std::vector<std::string> kVerbs = {"causes", "triggers", "induces", "produces", "provokes"};

struct Fixture {
  std::string dir;
  std::string config;
};

// 30 causal training sentences over disjoint noun pairs; nouns from index 60
// on never occur in training.
Fixture write_fixture(const ts::TempDir& tmp) {
  std::string semeval;
  for (int i = 0; i < 30; ++i)
    semeval += std::to_string(i + 1) + "\t\"The <e1>" + kNouns[2 * i] + "</e1> " + kVerbs[i % kVerbs.size()] +
               " <e2>" + kNouns[2 * i + 1] + "</e2>.\"\nCause-Effect(e1,e2)\nComment:\n\n";
  ts::write_file(tmp.file("train.txt"), semeval);
  json models = json::array();
  for (int m = 1; m <= 6; ++m)
    models.push_back({{"id", "h" + std::to_string(m)}, {"kind", "hashed"}, {"dimension", 128},
                      {"seed", "seed-" + std::to_string(m)}});
  const json cfg = {{"models", models},
                    {"datasets",
                     {{"train", {{"format", "semeval"}, {"path", "train.txt"}}},
                      {"test", {{"format", "jsonl"}, {"path", "test.jsonl"}}}}}};
  ts::write_file(tmp.file("config.json"), cfg.dump(2));
  return {tmp.str(), tmp.file("config.json")};
}

struct QuadText {
  std::string subject, trigger, object;
};

std::vector<QuadText> read_training_quads(const std::string& run_dir) {
  std::vector<QuadText> out;
  std::ifstream in(run_dir + "/training_quads.jsonl");
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) {
      const json j = json::parse(line);
      out.push_back({j["subject"], j["trigger"], j["object"]});
    }
  return out;
}

std::string tagged_line(const std::string& s, const std::string& v, const std::string& o) {
  std::string out;
  std::istringstream ss(s), os(o);
  std::string w;
  while (ss >> w) out += w + "/NN ";
  out += v + "/VBZ";
  while (os >> w) out += " " + w + "/NN";
  return out;
}

// 50 sentences: 20 causal and 10 non-causal reuse training phrases, 20 use
// nouns unseen in training.
void write_test_set(const std::string& path, const std::vector<QuadText>& quads) {
  std::string out;
  auto add = [&](int i, const std::string& tagged, bool causal) {
    out += json{{"id", "s" + std::to_string(i)}, {"tagged", tagged}, {"causal", causal}}.dump() + "\n";
  };
  for (int i = 0; i < 30; ++i) add(i, tagged_line(quads[i].subject, quads[i].trigger, quads[i].object), i < 20);
  for (int i = 30; i < 50; ++i) {
    const int k = 60 + (i - 30);
    add(i, tagged_line(kNouns[k], "cause", kNouns[(k + 7 - 60) % 28 + 60]), i < 40);
  }
  ts::write_file(path, out);
}

struct CliRun {
  int status;
  std::string err;
};

CliRun run_cli(const std::string& args, const ts::TempDir& tmp) {
  const std::string cmd = std::string(CAUSALMINE_CLI) + " " + args + " >/dev/null 2>" + tmp.file("cli.err");
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ts::read_file(tmp.file("cli.err"))};
}

// --- feedback identity ------------------------------------------------------

Outcome feedback_identity() {
  const auto t0 = Clock::now();
  ts::TempDir tmp;
  const Fixture fx = write_fixture(tmp);
  ts::write_file(tmp.file("test.jsonl"), "");
  auto config = cm::load_config(fx.config);
  const auto res = cm::build_resources(config);
  const std::string run_dir = tmp.file("run");
  auto run = cm::Run::open_or_create(run_dir, config, config.model_ids());
  cm::train(run, config, res);
  const auto quads = read_training_quads(run_dir);
  if (quads.size() < 30) return {false, "fixture produced only " + std::to_string(quads.size()) + " training quads"};
  write_test_set(tmp.file("test.jsonl"), quads);
  cm::classify(run, config, res, "test");

  auto before = cm::current_metrics(run);
  if (!before) return {false, "no gold labels in fixture"};
  // gold-negative predicted positives
  std::vector<std::string> fps;
  for (const auto& c : cm::load_candidates(run))
    if (c.prediction.causal() && c.gold && !*c.gold) fps.push_back(c.prediction.candidate.quad_id);
  if (fps.size() < 6) return {false, "only " + std::to_string(fps.size()) + " false positives to blocklist"};

  std::string detail = "start " + cm::report_csv_row(*before);
  detail.pop_back();
  const std::vector<std::vector<std::string>> batches = {
      {fps.begin(), fps.begin() + 4}, {fps.begin() + 4, fps.begin() + 7}, {fps.begin() + 7, fps.end()}};
  std::set<std::string> blocked;
  bool ok = true;
  cm::VerdictLog log(run.path("verdicts.jsonl"));
  cm::Timestamp ts_ms = cm::parse_iso8601("2024-01-01T00:00:00Z");
  for (std::size_t it = 0; it < batches.size(); ++it) {
    for (const auto& q : batches[it]) {
      cm::FeedbackVerdict v;
      v.quad_id = q;
      v.verdict = cm::Verdict::kNonCausal;
      v.expert_id = "expert";
      v.timestamp = ts_ms += 1000;
      log.append(v);
      blocked.insert(q);
    }
    const auto outcome = cm::evolve(run, res);
    const auto after = cm::current_metrics(run);
    const auto& m0 = before->matrix;
    const auto& m1 = after->matrix;
    const std::uint64_t k = batches[it].size();
    const bool identity = m1.tp == m0.tp && m1.fn == m0.fn && m1.fp + k == m0.fp && m1.tn == m0.tn + k;
    const bool recall_same = after->metrics.recall == before->metrics.recall;
    const bool p_up = *after->metrics.precision >= *before->metrics.precision;
    const bool a_up = *after->metrics.accuracy >= *before->metrics.accuracy;
    bool never_again = true;
    const std::string preds = ts::read_file(run.path("predictions.jsonl"));
    for (const auto& q : blocked)
      if (preds.find(q) != std::string::npos) never_again = false;
    for (const auto& c : cm::load_candidates(run))
      if (blocked.count(c.prediction.candidate.quad_id) && c.prediction.causal()) never_again = false;
    ok = ok && identity && recall_same && p_up && a_up && never_again &&
         outcome.iteration == static_cast<int>(it + 1);
    std::string row = cm::report_csv_row(*after);
    row.pop_back();
    detail += "; iteration " + std::to_string(it + 1) + " " + row + (identity ? "" : " [identity broken]") +
              (never_again ? "" : " [blocklisted quad reappeared]");
    before = after;
  }
  const double secs = seconds_since(t0);
  detail += "; " + fixed(secs) + " s";
  return {ok && secs < 60.0, detail};
}

// --- classify determinism ---------------------------------------------------

Outcome classify_determinism() {
  ts::TempDir tmp;
  const Fixture fx = write_fixture(tmp);
  ts::write_file(tmp.file("test.jsonl"), "");
  const std::string a = tmp.file("run-a"), b = tmp.file("run-b");
  for (const auto& dir : {a, b}) {
    const auto r = run_cli("train --config " + fx.config + " --run-dir " + dir, tmp);
    if (r.status != 0) return {false, "train failed: " + r.err};
  }
  write_test_set(tmp.file("test.jsonl"), read_training_quads(a));
  std::vector<std::string> outputs;
  for (const auto& dir : {a, b, a}) {
    const auto r = run_cli("classify --config " + fx.config + " --run-dir " + dir, tmp);
    if (r.status != 0) return {false, "classify failed: " + r.err};
    outputs.push_back(ts::read_file(dir + "/predictions.jsonl"));
  }
  const std::size_t lines = std::count(outputs[0].begin(), outputs[0].end(), '\n');
  const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2];
  return {same && lines > 0, std::to_string(lines) + " predictions, " + std::to_string(outputs[0].size()) +
                                 " bytes, identical across 3 classify runs: " + (same ? "yes" : "no")};
}

// --- remove_similar equivalence ---------------------------------------------

Outcome remove_similar_equivalence() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> size(1, 100), dims(2, 16), probes_n(0, 5), bins(1, 50);
  std::uniform_real_distribution<double> thr(0.5, 0.99), scale(0.1, 10);
  std::normal_distribution<float> g;
  std::bernoulli_distribution zero(0.05), copy(0.15), pre_off(0.1);
  std::size_t bad = 0, removed_total = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = size(rng), d = dims(rng), p = probes_n(rng);
    const double t = thr(rng);
    std::vector<std::vector<float>> probes(p, std::vector<float>(d));
    for (auto& r : probes)
      for (auto& x : r) x = g(rng);
    std::vector<std::vector<float>> rows(n, std::vector<float>(d));
    for (auto& r : rows) {
      if (zero(rng)) continue;
      if (p > 0 && copy(rng)) {
        // scaled, lightly perturbed probe copy
        const auto& src = probes[rng() % p];
        const double s = scale(rng);
        for (int k = 0; k < d; ++k) r[k] = static_cast<float>(src[k] * s) + 0.05f * g(rng);
      } else {
        for (auto& x : r) x = g(rng);
      }
    }
    cm::EmbeddingMatrix m(0, d), pm(0, d);
    for (const auto& r : rows) m.append(r);
    for (const auto& r : probes) pm.append(r);
    std::vector<std::string> ids(n, "x");
    auto store = cm::VectorStore::build("s", m, ids, bins(rng));
    std::vector<bool> active(n, true);
    for (int i = 0; i < n; ++i)
      if (pre_off(rng)) {
        store.deactivate(i);
        active[i] = false;
      }
    std::set<int> want;
    for (int i = 0; i < n; ++i) {
      if (!active[i]) continue;
      const bool nonzero = std::any_of(rows[i].begin(), rows[i].end(), [](float x) { return x != 0; });
      if (!nonzero) continue;
      for (const auto& pr : probes)
        if (ts::oracle_cosine(rows[i], pr) >= t) {
          want.insert(i);
          break;
        }
    }
    const std::size_t removed = store.remove_similar(pm, t);
    removed_total += removed;
    bool same = removed == want.size();
    for (int i = 0; i < n && same; ++i) same = store.is_active(i) == (active[i] && !want.count(i));
    if (!same) ++bad;
  }
  return {bad == 0 && removed_total > 0, "500 trials, " + std::to_string(removed_total) +
                                             " entries removed, " + std::to_string(bad) + " mismatching trials"};
}

const std::vector<std::pair<std::string, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"metric_replay", metric_replay},
      {"store_layout", store_layout},
      {"extraction_oracle", extraction_oracle},
      {"cosine_properties", cosine_properties},
      {"ensemble_monotonicity", ensemble_monotonicity},
      {"feedback_identity", feedback_identity},
      {"classify_determinism", classify_determinism},
      {"remove_similar_equivalence", remove_similar_equivalence},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance criteria");
  std::vector<std::string> selected;
  bool list = false;
  app.add_option("--criterion", selected, "run only these criteria");
  app.add_flag("--list", list, "print criterion names");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& [name, fn] : criteria()) std::cout << name << "\n";
    return 0;
  }
  int failed = 0;
  for (const auto& [name, fn] : criteria()) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), name) == selected.end()) continue;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  for (const auto& s : selected)
    if (std::none_of(criteria().begin(), criteria().end(), [&](const auto& c) { return c.first == s; })) {
      std::cout << "FAIL " << s << ": unknown criterion" << std::endl;
      ++failed;
    }
  return failed == 0 ? 0 : 1;
}

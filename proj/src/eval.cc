#include "causalmine/eval.h"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "causalmine/error.h"

namespace causalmine {

namespace fs = std::filesystem;
using nlohmann::json;

Percent percent_hundredths(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  // round(10000 * num / den) with halves going up, in integers
  const unsigned __int128 n = static_cast<unsigned __int128>(num) * 20000u + den;
  return static_cast<std::int64_t>(n / (2 * static_cast<unsigned __int128>(den)));
}

std::string format_percent(const Percent& p) {
  if (!p) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld", static_cast<long long>(*p / 100),
                static_cast<long long>(*p % 100));
  return buf;
}

std::optional<double> percent_value(const Percent& p) {
  if (!p) return std::nullopt;
  return static_cast<double>(*p) / 100.0;
}

ConfusionMatrix confusion(const std::set<std::string>& predictions,
                          const std::set<std::string>& gold,
                          const std::set<std::string>& universe) {
  for (const auto& p : predictions)
    if (!universe.count(p))
      throw Error(ErrorCode::kInvalidArgument, "prediction '" + p + "' is outside the universe");
  for (const auto& g : gold)
    if (!universe.count(g))
      throw Error(ErrorCode::kInvalidArgument, "gold item '" + g + "' is outside the universe");
  ConfusionMatrix m;
  for (const auto& u : universe) {
    const bool p = predictions.count(u) != 0;
    const bool g = gold.count(u) != 0;
    if (p && g) ++m.tp;
    else if (p) ++m.fp;
    else if (g) ++m.fn;
    else ++m.tn;
  }
  return m;
}

Metrics metrics(const ConfusionMatrix& m) {
  return {percent_hundredths(m.tp + m.tn, m.total()), percent_hundredths(m.tp, m.pp()),
          percent_hundredths(m.tp, m.tp + m.fn)};
}

DegreeReport degree_report(const std::map<std::string, std::set<std::string>>& per_model,
                           const std::set<std::string>& gold, std::vector<DegreeRange> ranges) {
  if (per_model.size() < 2)
    throw Error(ErrorCode::kInvalidArgument, "degree report needs at least two model sets");
  const int k = static_cast<int>(per_model.size());
  if (ranges.empty()) {
    ranges.push_back({1, std::min(3, k)});
    if (k >= 4) ranges.push_back({4, k});
  }
  for (const auto& r : ranges)
    if (r.lo < 1 || r.hi < r.lo)
      throw Error(ErrorCode::kInvalidArgument, "bad degree range");

  std::map<std::string, int> degree;
  for (const auto& [model, quads] : per_model)
    for (const auto& q : quads) ++degree[q];

  DegreeReport out;
  for (const auto& [q, d] : degree) {
    ++out.histogram[d];
    if (gold.count(q)) ++out.tp_in_degree[d];
  }
  for (const auto& g : gold)
    if (!degree.count(g)) ++out.gold_missed;

  for (const DegreeRange& r : ranges) {
    DegreeGroup g;
    g.range = r;
    for (const auto& [q, d] : degree) {
      const bool in = d >= r.lo && d <= r.hi;
      const bool causal = gold.count(q) != 0;
      if (in && causal) ++g.matrix.tp;
      else if (in) ++g.matrix.fp;
      else if (causal) ++g.matrix.fn;
      else ++g.matrix.tn;
    }
    g.metrics = metrics(g.matrix);
    out.groups.push_back(g);
  }
  return out;
}

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kWordVectors: return "1";
    case Stage::kSentenceEmbedding: return "2";
    case Stage::kNominal: return "3";
    case Stage::kEnsemble: return "4";
    case Stage::kFeedback: return "feedback";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  if (s == "1") return Stage::kWordVectors;
  if (s == "2") return Stage::kSentenceEmbedding;
  if (s == "3") return Stage::kNominal;
  if (s == "4") return Stage::kEnsemble;
  if (s == "feedback") return Stage::kFeedback;
  throw Error(ErrorCode::kInvalidArgument, "stage must be 1, 2, 3, 4 or feedback; got '" + s + "'");
}

json to_json(const ConfusionMatrix& m) {
  return {{"pp", m.pp()}, {"pn", m.pn()}, {"tp", m.tp},
          {"fn", m.fn},   {"fp", m.fp},   {"tn", m.tn}};
}

namespace {

json percent_json(const Percent& p) {
  if (!p) return "undefined";
  return *percent_value(p);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_text(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

}  // namespace

json to_json(const Metrics& m) {
  return {{"accuracy", percent_json(m.accuracy)},
          {"precision", percent_json(m.precision)},
          {"recall", percent_json(m.recall)}};
}

json to_json(const EvaluationReport& r) {
  json j = {{"dataset", r.dataset_id},
            {"stage", r.stage_id},
            {"universe", r.universe},
            {"matrix", to_json(r.matrix)},
            {"metrics", to_json(r.metrics)}};
  if (!r.per_model.empty()) {
    json pm = json::object();
    for (const auto& [model, m] : r.per_model)
      pm[model] = {{"matrix", to_json(m)}, {"metrics", to_json(metrics(m))}};
    j["per_model"] = pm;
  }
  if (r.degrees) {
    json hist = json::array();
    for (const auto& [d, n] : r.degrees->histogram) {
      auto it = r.degrees->tp_in_degree.find(d);
      hist.push_back({{"degree", d},
                      {"count", n},
                      {"tp_in_degree", it == r.degrees->tp_in_degree.end() ? 0 : it->second}});
    }
    json groups = json::array();
    for (const auto& g : r.degrees->groups)
      groups.push_back({{"lo", g.range.lo},
                        {"hi", g.range.hi},
                        {"matrix", to_json(g.matrix)},
                        {"metrics", to_json(g.metrics)}});
    j["degree_histogram"] = hist;
    j["degree_groups"] = groups;
    j["gold_missed"] = r.degrees->gold_missed;
  }
  return j;
}

std::string report_csv_header() { return "dataset,stage,PP,PN,TP,FN,FP,TN,A,P,R\n"; }

std::string report_csv_row(const EvaluationReport& r) {
  std::ostringstream os;
  const ConfusionMatrix& m = r.matrix;
  os << csv_escape(r.dataset_id) << ',' << csv_escape(r.stage_id) << ',' << m.pp() << ','
     << m.pn() << ',' << m.tp << ',' << m.fn << ',' << m.fp << ',' << m.tn << ','
     << format_percent(r.metrics.accuracy) << ',' << format_percent(r.metrics.precision) << ','
     << format_percent(r.metrics.recall) << '\n';
  return os.str();
}

std::string degree_csv(const DegreeReport& d) {
  std::ostringstream os;
  os << "degree,count,tp_in_degree\n";
  for (const auto& [deg, n] : d.histogram) {
    auto it = d.tp_in_degree.find(deg);
    os << deg << ',' << n << ',' << (it == d.tp_in_degree.end() ? 0 : it->second) << '\n';
  }
  return os.str();
}

void write_report(const EvaluationReport& r, const std::string& dir, const std::string& stem) {
  fs::create_directories(dir);
  write_text(fs::path(dir) / (stem + ".json"), to_json(r).dump(2) + "\n");
  write_text(fs::path(dir) / (stem + ".csv"), report_csv_header() + report_csv_row(r));
  if (r.degrees) write_text(fs::path(dir) / (stem + ".degrees.csv"), degree_csv(*r.degrees));
}

std::set<std::string> gold_triples(const EvalDataset& dataset) {
  std::vector<TaggedSentence> causal;
  for (const auto& s : dataset.sentences)
    if (s.causal) causal.push_back(s.sentence);
  std::set<std::string> out;
  for (const Candidate& c : collect_candidates(causal)) out.insert(c.quad_id);
  return out;
}

EvaluationReport score_predictions(const std::string& dataset_id, const std::string& stage_id,
                                   const std::vector<Prediction>& predictions,
                                   const std::set<std::string>& gold_quad_ids,
                                   bool with_degrees) {
  EvaluationReport r;
  r.dataset_id = dataset_id;
  r.stage_id = stage_id;
  r.universe = "triples";
  std::set<std::string> universe, predicted;
  std::map<std::string, std::set<std::string>> per_model;
  for (const Prediction& p : predictions) {
    universe.insert(p.candidate.quad_id);
    if (p.causal()) predicted.insert(p.candidate.quad_id);
    for (const ModelVerdict& v : p.decision.verdicts) {
      auto& set = per_model[v.model_id];
      if (v.flagged && !p.blocklisted) set.insert(p.candidate.quad_id);
    }
  }
  std::set<std::string> gold;
  for (const auto& g : gold_quad_ids)
    if (universe.count(g)) gold.insert(g);
  r.matrix = confusion(predicted, gold, universe);
  r.metrics = metrics(r.matrix);
  if (with_degrees) {
    for (const auto& [model, set] : per_model) r.per_model[model] = confusion(set, gold, universe);
    if (per_model.size() >= 2) r.degrees = degree_report(per_model, gold);
  }
  return r;
}

EvaluationReport run_stage(const StageConfig& config, const StageInputs& in) {
  if (!in.dataset || !in.providers)
    throw Error(ErrorCode::kInvalidArgument, "run_stage needs a dataset and providers");
  const std::string stage_id = stage_name(config.stage);
  const bool sentence_universe =
      config.stage == Stage::kWordVectors || config.stage == Stage::kSentenceEmbedding;
  const bool ensemble = config.stage == Stage::kEnsemble || config.stage == Stage::kFeedback;

  EvaluationReport empty;
  empty.dataset_id = in.dataset->id;
  empty.stage_id = stage_id;
  empty.universe = sentence_universe ? "sentences" : "triples";
  empty.metrics = metrics(empty.matrix);
  if (in.dataset->sentences.empty()) return empty;

  try {
    if (config.model_ids.empty())
      throw Error(ErrorCode::kInvalidArgument, "no models configured");
    EnsembleConfig ens;
    ens.classification_threshold = config.classification_threshold;
    if (ensemble) {
      ens.model_ids = config.model_ids;
      ens.degree_threshold = config.degree_threshold;
    } else {
      ens.model_ids = {config.model_ids.front()};
      ens.degree_threshold = 1;
    }
    if (config.stage == Stage::kWordVectors) {
      auto it = in.providers->find(ens.model_ids.front());
      if (it != in.providers->end() && it->second &&
          it->second->kind() != ProviderKind::kWordVectorAverage)
        throw Error(ErrorCode::kInvalidArgument,
                    "stage 1 needs a word-vector-average provider; '" + ens.model_ids.front() +
                        "' is " + std::string(provider_kind_name(it->second->kind())));
    }
    if (config.stage == Stage::kFeedback && !in.blocklist)
      throw Error(ErrorCode::kInvalidArgument, "feedback stage needs a blocklist");

    StoreMap built;
    const StoreMap* stores = in.stores;
    if (!stores) {
      if (!in.training) throw Error(ErrorCode::kInvalidArgument, "no training data or stores");
      ExpansionConfig exp = config.expansion;
      exp.expand_nominals = !sentence_universe;
      const TrainingSet ts = build_training_set(*in.training, exp, in.word_models,
                                                config.quad_filter_threshold);
      built = build_stores(ts.quads, *in.providers, ens.model_ids, config.bin_size);
      stores = &built;
    }

    std::vector<TaggedSentence> sentences;
    for (const auto& s : in.dataset->sentences) sentences.push_back(s.sentence);
    const std::vector<Candidate> candidates = collect_candidates(sentences);
    const Blocklist* bl = config.stage == Stage::kFeedback ? in.blocklist : nullptr;
    const std::vector<Prediction> preds = classify_candidates(
        candidates, *stores, *in.providers, ens, bl, config.classification_threshold);

    if (!sentence_universe)
      return score_predictions(in.dataset->id, stage_id, preds, gold_triples(*in.dataset),
                               ensemble);

    std::set<std::string> causal_quads;
    for (const Prediction& p : preds)
      if (p.causal()) causal_quads.insert(p.candidate.quad_id);
    std::map<std::string, std::vector<std::string>> quads_of_sentence;
    for (const Candidate& c : candidates)
      for (const auto& sid : c.sentence_ids) quads_of_sentence[sid].push_back(c.quad_id);

    std::set<std::string> universe, predicted, gold;
    for (const auto& ls : in.dataset->sentences) {
      const std::string& sid = ls.sentence.sentence_id;
      if (!universe.insert(sid).second)
        throw Error(ErrorCode::kMalformedInput, "duplicate sentence id '" + sid + "'");
      if (ls.causal) gold.insert(sid);
      for (const auto& q : quads_of_sentence[sid])
        if (causal_quads.count(q)) {
          predicted.insert(sid);
          break;
        }
    }
    EvaluationReport r = empty;
    r.matrix = confusion(predicted, gold, universe);
    r.metrics = metrics(r.matrix);
    return r;
  } catch (const Error& e) {
    throw Error(e.code(), "stage " + stage_id + " on '" + in.dataset->id + "': " + e.what());
  }
}

}  // namespace causalmine

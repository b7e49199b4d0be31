#include "causalmine/config.h"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "causalmine/error.h"
#include "causalmine/semeval.h"

namespace causalmine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& msg) {
  throw Error(ErrorCode::kMalformedInput, "config: " + msg);
}

std::string resolve(const std::string& base, const std::string& p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return fs::absolute(fs::path(base) / p).lexically_normal().string();
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    bad(std::string("'") + key + "' has the wrong type");
  }
}

const std::set<std::string> kTopKeys = {
    "alpha",    "top_k",     "quad_filter_threshold", "classification_threshold",
    "degree_threshold", "bin_size", "models", "word_vectors", "synonyms", "tagger",
    "concepts", "lemmas", "stopwords", "abbreviations", "datasets", "api_token",
    "http_timeout_seconds"};

}  // namespace

std::vector<std::string> PipelineConfig::model_ids() const {
  std::vector<std::string> out;
  for (const auto& m : models) out.push_back(m.id);
  return out;
}

void PipelineConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) bad("alpha must lie in [0, 1]");
  if (top_k == 0) bad("top_k must be positive");
  if (!(quad_filter_threshold >= 0.0 && quad_filter_threshold <= 1.0))
    bad("quad_filter_threshold must lie in [0, 1]");
  if (!(classification_threshold >= -1.0 && classification_threshold <= 1.0))
    bad("classification_threshold must lie in [-1, 1]");
  if (bin_size == 0) bad("bin_size must be positive");
  if (models.empty()) bad("at least one model is required");
  // above the panel size nothing is ever voted causal; allowed
  if (degree_threshold < 1) bad("degree_threshold must be at least 1");
  std::set<std::string> ids;
  for (const auto& m : models) {
    validate_model_id(m.id);
    if (!ids.insert(m.id).second) bad("duplicate model id '" + m.id + "'");
    if (m.kind == "hashed") {
      if (m.dimension == 0) bad("model '" + m.id + "': hashed models need a dimension");
    } else if (m.kind == "file" || m.kind == "word_vectors") {
      if (m.path.empty()) bad("model '" + m.id + "': path is required");
    } else if (m.kind == "http") {
      if (m.endpoint.empty()) bad("model '" + m.id + "': endpoint is required");
    } else {
      bad("model '" + m.id + "': unknown kind '" + m.kind + "'");
    }
  }
  if (tagger != "heuristic" && tagger != "http") bad("tagger must be heuristic or http");
  if (tagger == "http" && tagger_endpoint.empty()) bad("http tagger needs an endpoint");
  if (!concepts.empty() && concepts != "dictionary" && concepts != "http")
    bad("concepts must be dictionary or http");
  if (concepts == "dictionary" && concepts_path.empty()) bad("concept dictionary needs a path");
  if (concepts == "http" && concepts_endpoint.empty()) bad("concept service needs an endpoint");
  for (const auto& [name, d] : datasets) {
    if (d.format != "semeval" && d.format != "jsonl" && d.format != "text")
      bad("dataset '" + name + "': format must be semeval, jsonl or text");
    if (d.path.empty()) bad("dataset '" + name + "': path is required");
  }
  if (!(http_timeout_seconds > 0.0)) bad("http_timeout_seconds must be positive");
}

PipelineConfig parse_config(const json& j, const std::string& base_dir) {
  if (!j.is_object()) bad("top level must be an object");
  for (const auto& [key, value] : j.items())
    if (!kTopKeys.count(key)) bad("unknown key '" + key + "'");
  PipelineConfig c;
  c.alpha = get_or(j, "alpha", c.alpha);
  c.top_k = get_or(j, "top_k", c.top_k);
  c.quad_filter_threshold = get_or(j, "quad_filter_threshold", c.quad_filter_threshold);
  c.classification_threshold = get_or(j, "classification_threshold", c.classification_threshold);
  c.degree_threshold = get_or(j, "degree_threshold", c.degree_threshold);
  c.bin_size = get_or(j, "bin_size", c.bin_size);
  c.api_token = get_or<std::string>(j, "api_token", "");
  c.http_timeout_seconds = get_or(j, "http_timeout_seconds", c.http_timeout_seconds);

  if (auto it = j.find("models"); it != j.end()) {
    if (!it->is_array()) bad("'models' must be an array");
    for (const json& m : *it) {
      if (!m.is_object()) bad("model entries must be objects");
      ModelSpec s;
      s.id = get_or<std::string>(m, "id", "");
      s.kind = get_or<std::string>(m, "kind", "");
      s.path = resolve(base_dir, get_or<std::string>(m, "path", ""));
      s.endpoint = get_or<std::string>(m, "endpoint", "");
      s.model = get_or<std::string>(m, "model", s.id);
      s.dimension = get_or<std::size_t>(m, "dimension", 0);
      s.seed = get_or<std::string>(m, "seed", s.id);
      c.models.push_back(std::move(s));
    }
  }
  for (const auto& p : get_or<std::vector<std::string>>(j, "word_vectors", {}))
    c.word_vectors.push_back(resolve(base_dir, p));
  c.synonyms = resolve(base_dir, get_or<std::string>(j, "synonyms", ""));
  c.lemmas = resolve(base_dir, get_or<std::string>(j, "lemmas", ""));
  c.stopwords = resolve(base_dir, get_or<std::string>(j, "stopwords", ""));
  c.abbreviations = resolve(base_dir, get_or<std::string>(j, "abbreviations", ""));

  if (auto it = j.find("tagger"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) bad("'tagger' must be an object");
    c.tagger = get_or<std::string>(*it, "kind", "heuristic");
    c.tagger_endpoint = get_or<std::string>(*it, "endpoint", "");
    c.tagger_lexicon = resolve(base_dir, get_or<std::string>(*it, "lexicon", ""));
  }
  if (auto it = j.find("concepts"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) bad("'concepts' must be an object");
    c.concepts = get_or<std::string>(*it, "kind", "");
    c.concepts_path = resolve(base_dir, get_or<std::string>(*it, "path", ""));
    c.concepts_endpoint = get_or<std::string>(*it, "endpoint", "");
  }
  if (auto it = j.find("datasets"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) bad("'datasets' must be an object");
    for (const auto& [name, d] : it->items()) {
      if (!d.is_object()) bad("dataset '" + name + "' must be an object");
      DatasetSpec s;
      s.format = get_or<std::string>(d, "format", "");
      s.path = resolve(base_dir, get_or<std::string>(d, "path", ""));
      s.key = resolve(base_dir, get_or<std::string>(d, "key", ""));
      c.datasets[name] = s;
    }
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad(path + ": " + e.what());
  }
  PipelineConfig c = parse_config(j, fs::path(path).parent_path().string());
  apply_env_overrides(c);
  c.validate();
  return c;
}

json to_json(const PipelineConfig& c) {
  json models = json::array();
  for (const auto& m : c.models) {
    json e = {{"id", m.id}, {"kind", m.kind}};
    if (!m.path.empty()) e["path"] = m.path;
    if (!m.endpoint.empty()) e["endpoint"] = m.endpoint;
    if (m.kind == "http") e["model"] = m.model;
    if (m.kind == "hashed") {
      e["dimension"] = m.dimension;
      e["seed"] = m.seed;
    }
    models.push_back(e);
  }
  json datasets = json::object();
  for (const auto& [name, d] : c.datasets) {
    json e = {{"format", d.format}, {"path", d.path}};
    if (!d.key.empty()) e["key"] = d.key;
    datasets[name] = e;
  }
  json j = {{"alpha", c.alpha},
            {"top_k", c.top_k},
            {"quad_filter_threshold", c.quad_filter_threshold},
            {"classification_threshold", c.classification_threshold},
            {"degree_threshold", c.degree_threshold},
            {"bin_size", c.bin_size},
            {"models", models},
            {"word_vectors", c.word_vectors},
            {"tagger", {{"kind", c.tagger}}},
            {"datasets", datasets},
            {"http_timeout_seconds", c.http_timeout_seconds}};
  if (!c.tagger_endpoint.empty()) j["tagger"]["endpoint"] = c.tagger_endpoint;
  if (!c.tagger_lexicon.empty()) j["tagger"]["lexicon"] = c.tagger_lexicon;
  if (!c.concepts.empty()) {
    j["concepts"] = {{"kind", c.concepts}};
    if (!c.concepts_path.empty()) j["concepts"]["path"] = c.concepts_path;
    if (!c.concepts_endpoint.empty()) j["concepts"]["endpoint"] = c.concepts_endpoint;
  }
  if (!c.synonyms.empty()) j["synonyms"] = c.synonyms;
  if (!c.lemmas.empty()) j["lemmas"] = c.lemmas;
  if (!c.stopwords.empty()) j["stopwords"] = c.stopwords;
  if (!c.abbreviations.empty()) j["abbreviations"] = c.abbreviations;
  // the token is deliberately not echoed into run snapshots
  return j;
}

std::string embed_endpoint_env_name(const std::string& model_id) {
  std::string out = "CAUSALMINE_EMBED_ENDPOINT_";
  for (unsigned char ch : model_id)
    out += std::isalnum(ch) ? static_cast<char>(std::toupper(ch)) : '_';
  return out;
}

void apply_env_overrides(PipelineConfig& c) {
  auto env = [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
  const auto shared = env("CAUSALMINE_EMBED_ENDPOINT");
  for (auto& m : c.models) {
    if (m.kind != "http") continue;
    if (auto own = env(embed_endpoint_env_name(m.id)))
      m.endpoint = *own;
    else if (shared)
      m.endpoint = *shared;
  }
  if (auto t = env("CAUSALMINE_TAGGER_ENDPOINT")) c.tagger_endpoint = *t;
  if (auto t = env("CAUSALMINE_CONCEPT_ENDPOINT")) c.concepts_endpoint = *t;
}

std::vector<const WordVectorModel*> Resources::word_models() const {
  std::vector<const WordVectorModel*> out;
  for (const auto& m : word_vector_models) out.push_back(m.get());
  return out;
}

Resources build_resources(const PipelineConfig& c, const std::vector<std::string>& model_ids) {
  Resources r;
  std::set<std::string> wanted(model_ids.begin(), model_ids.end());
  for (const auto& id : wanted) {
    bool known = false;
    for (const auto& m : c.models) known = known || m.id == id;
    if (!known) throw Error(ErrorCode::kInvalidArgument, "unknown model '" + id + "'");
  }
  HttpClientOptions http;
  http.timeout_seconds = c.http_timeout_seconds;
  for (const ModelSpec& m : c.models) {
    if (!wanted.empty() && !wanted.count(m.id)) continue;
    std::shared_ptr<const EmbeddingProvider> p;
    if (m.kind == "hashed") {
      p = std::make_shared<HashedEmbeddingProvider>(m.id, m.dimension, m.seed);
    } else if (m.kind == "file") {
      p = PrecomputedFileProvider::load(m.path, m.id);
    } else if (m.kind == "word_vectors") {
      auto wv = std::make_shared<const WordVectorModel>(WordVectorModel::load(m.path, m.id));
      p = std::make_shared<WordVectorAverageProvider>(m.id, wv);
    } else {
      HttpClientOptions o = http;
      o.base_url = m.endpoint;
      p = std::make_shared<HttpEmbeddingProvider>(m.id, m.model, o);
    }
    r.providers.emplace(m.id, std::move(p));
  }
  for (std::size_t i = 0; i < c.word_vectors.size(); ++i)
    r.word_vector_models.push_back(std::make_shared<const WordVectorModel>(
        WordVectorModel::load(c.word_vectors[i], "wv" + std::to_string(i))));

  if (c.tagger == "http") {
    HttpClientOptions o = http;
    o.base_url = c.tagger_endpoint;
    r.tagger = std::make_shared<HttpTagger>(o);
  } else if (!c.tagger_lexicon.empty()) {
    r.tagger = std::make_shared<HeuristicTagger>(HeuristicTagger::load(c.tagger_lexicon));
  } else {
    r.tagger = std::make_shared<HeuristicTagger>();
  }

  if (c.concepts == "dictionary") {
    r.concepts = std::make_shared<CachingConceptProvider>(
        std::make_shared<DictionaryConceptProvider>(
            DictionaryConceptProvider::load(c.concepts_path)));
  } else if (c.concepts == "http") {
    HttpClientOptions o = http;
    o.base_url = c.concepts_endpoint;
    r.concepts = std::make_shared<CachingConceptProvider>(std::make_shared<HttpConceptProvider>(o));
  }

  if (!c.lemmas.empty()) r.preprocess.lexicon = LemmaLexicon::load(c.lemmas);
  if (!c.stopwords.empty()) r.preprocess.stopwords = StopwordSet::load(c.stopwords);
  if (!c.abbreviations.empty()) r.preprocess.abbreviations = load_abbreviations(c.abbreviations);

  r.expansion.alpha = c.alpha;
  r.expansion.top_k = c.top_k;
  if (!c.synonyms.empty()) r.expansion.synonyms = SynonymLexicon::load(c.synonyms);
  return r;
}

const DatasetSpec& dataset_spec(const PipelineConfig& c, const std::string& name) {
  auto it = c.datasets.find(name);
  if (it == c.datasets.end())
    throw Error(ErrorCode::kInvalidArgument, "no dataset named '" + name + "' in the config");
  return it->second;
}

namespace {

std::vector<SemevalRecord> semeval_records(const DatasetSpec& spec) {
  std::vector<SemevalRecord> recs = load_semeval(spec.path);
  if (!spec.key.empty()) apply_semeval_key(recs, spec.key);
  return recs;
}

TaggedSentence single_sentence(const std::string& id, const std::string& text,
                               const Resources& r) {
  TaggedSentence s;
  s.doc_id = id;
  s.sentence_id = id;
  s.raw_text = text;
  s.normalized_text = normalize(text, r.preprocess.special_characters);
  s.tokens = tokenize_and_lemmatize(s.normalized_text, r.preprocess.lexicon,
                                    r.preprocess.stopwords);
  pos_tag(s.tokens, *r.tagger);
  refine_lemmas(s.tokens, r.preprocess.lexicon);
  return s;
}

}  // namespace

std::vector<AnnotatedSentence> load_training(const DatasetSpec& spec, const Resources& r) {
  if (spec.format != "semeval")
    throw Error(ErrorCode::kInvalidArgument,
                "training data must be entity-annotated (format semeval), got " + spec.format);
  std::vector<AnnotatedSentence> out;
  for (const SemevalRecord& rec : semeval_records(spec)) {
    if (rec.relation.empty())
      throw Error(ErrorCode::kMalformedInput, "training record " + rec.id + " has no relation");
    out.push_back(annotate(rec, r.preprocess, *r.tagger));
  }
  return out;
}

EvalDataset load_dataset(const std::string& id, const DatasetSpec& spec, const Resources& r) {
  EvalDataset ds;
  ds.id = id;
  if (spec.format == "semeval") {
    for (const SemevalRecord& rec : semeval_records(spec)) {
      if (rec.relation.empty()) ds.labeled = false;
      AnnotatedSentence a = annotate(rec, r.preprocess, *r.tagger);
      ds.sentences.push_back({std::move(a.sentence), a.is_causal()});
    }
  } else if (spec.format == "jsonl") {
    std::ifstream in(spec.path);
    if (!in) throw Error(ErrorCode::kIo, "cannot read " + spec.path);
    std::string line;
    std::size_t n = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const std::string where = spec.path + ":" + std::to_string(n);
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw Error(ErrorCode::kMalformedInput, where + ": " + e.what());
      }
      if (!j.is_object() || !j.contains("id") || !j["id"].is_string())
        throw Error(ErrorCode::kMalformedInput, where + ": needs a string 'id'");
      const std::string sid = j["id"].get<std::string>();
      if (!seen.insert(sid).second)
        throw Error(ErrorCode::kMalformedInput, where + ": duplicate id '" + sid + "'");
      if (!j.contains("causal")) ds.labeled = false;
      const bool causal = j.value("causal", false);
      TaggedSentence s;
      if (j.contains("tagged")) {
        auto parsed = preprocess_pretagged(sid, j["tagged"].get<std::string>(), r.preprocess);
        if (parsed.size() != 1)
          throw Error(ErrorCode::kMalformedInput, where + ": 'tagged' must hold one sentence");
        s = std::move(parsed.front());
        s.sentence_id = sid;
      } else if (j.contains("text") && j["text"].is_string()) {
        s = single_sentence(sid, j["text"].get<std::string>(), r);
      } else {
        throw Error(ErrorCode::kMalformedInput, where + ": needs 'text' or 'tagged'");
      }
      ds.sentences.push_back({std::move(s), causal});
    }
  } else {
    ds.labeled = false;
    RawDocument doc = load_plain_document(spec.path);
    for (TaggedSentence& s : preprocess_document(doc, r.preprocess, *r.tagger))
      ds.sentences.push_back({std::move(s), false});
  }
  return ds;
}

}  // namespace causalmine

#include "causalmine/concepts.h"

#include <fstream>
#include <set>
#include <sstream>

#include "causalmine/embedding.h"
#include "causalmine/error.h"
#include "causalmine/text.h"

namespace causalmine {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  return out;
}

std::string join(const std::vector<std::string>& words, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (!out.empty()) out.push_back(' ');
    out += words[i];
  }
  return out;
}

}  // namespace

DictionaryConceptProvider DictionaryConceptProvider::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open concept dictionary: " + path);
  DictionaryConceptProvider dict;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 3 || cols.size() > 4 || cols[0].empty() || cols[1].empty()) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) +
                      ": expected term<TAB>cui<TAB>name<TAB>semtypes");
    }
    ConceptAnnotation c;
    c.cui = cols[1];
    c.preferred_name = cols[2];
    if (cols.size() == 4 && !cols[3].empty()) c.semantic_types = split(cols[3], '|');
    dict.add(cols[0], std::move(c));
  }
  return dict;
}

void DictionaryConceptProvider::add(const std::string& term, ConceptAnnotation c) {
  auto& list = entries_[to_lower(term)];
  for (const auto& existing : list) {
    if (existing.cui == c.cui) return;
  }
  c.matched_text.clear();
  list.push_back(std::move(c));
}

std::vector<ConceptAnnotation> DictionaryConceptProvider::exact(const std::string& term) const {
  auto it = entries_.find(term);
  return it == entries_.end() ? std::vector<ConceptAnnotation>{} : it->second;
}

std::vector<ConceptAnnotation> HttpConceptProvider::exact(const std::string& term) const {
  nlohmann::json reply = client_.get("/concepts?term=" + url_encode(term));
  if (!reply.is_array()) {
    throw Error(ErrorCode::kProviderUnavailable, "concept service returned a non-array");
  }
  std::vector<ConceptAnnotation> out;
  try {
    for (const auto& j : reply) {
      ConceptAnnotation c;
      c.cui = j.at("cui").get<std::string>();
      c.preferred_name = j.value("name", "");
      if (j.contains("semtypes")) c.semantic_types = j["semtypes"].get<std::vector<std::string>>();
      if (c.cui.empty()) continue;
      out.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kProviderUnavailable, std::string("concept service: ") + e.what());
  }
  return out;
}

std::vector<ConceptAnnotation> CachingConceptProvider::exact(const std::string& term) const {
  const std::string key = to_lower(term);
  {
    std::lock_guard lock(mu_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  }
  auto result = inner_->exact(key);
  std::lock_guard lock(mu_);
  cache_.emplace(key, result);
  return result;
}

std::vector<ConceptAnnotation> lookup_concepts(const std::string& term,
                                               const ConceptProvider& provider) {
  if (term.empty()) throw Error(ErrorCode::kInvalidArgument, "empty concept lookup term");
  std::string lower = to_lower(term);
  auto words = split_words(lower);
  std::string canonical = join(words, 0, words.size());
  auto tag = [](std::vector<ConceptAnnotation> found, const std::string& text) {
    for (auto& c : found) c.matched_text = text;
    return found;
  };
  if (auto hit = provider.exact(canonical); !hit.empty()) return tag(std::move(hit), canonical);

  for (std::size_t len = words.size() - (words.empty() ? 0 : 1); len >= 1; --len) {
    std::vector<ConceptAnnotation> found;
    std::set<std::string> cuis;
    for (std::size_t b = 0; b + len <= words.size(); ++b) {
      std::string span = join(words, b, b + len);
      for (auto& c : tag(provider.exact(span), span)) {
        if (cuis.insert(c.cui).second) found.push_back(std::move(c));
      }
    }
    if (!found.empty()) return found;
  }
  return {};
}

EnrichedQuad enrich(const EnrichedQuad& quad, const ConceptProvider& provider) {
  EnrichedQuad out;
  out.quad = quad.quad;
  out.subject_concepts = lookup_concepts(quad.quad.subject, provider);
  out.object_concepts = lookup_concepts(quad.quad.object, provider);
  return out;
}

std::vector<EnrichedQuad> enrich_and_filter(const std::vector<CausalQuad>& quads,
                                            const ConceptProvider& provider) {
  std::vector<EnrichedQuad> out;
  for (const auto& q : quads) {
    EnrichedQuad e;
    try {
      e = enrich(EnrichedQuad{q, {}, {}}, provider);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kInvalidArgument) throw;
      throw Error(ErrorCode::kEnrichmentIncomplete,
                  "enriching '" + q.phrase() + "': " + err.what());
    }
    if (e.subject_concepts.empty() && e.object_concepts.empty()) continue;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace causalmine

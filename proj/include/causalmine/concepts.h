#ifndef CAUSALMINE_CONCEPTS_H_
#define CAUSALMINE_CONCEPTS_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "causalmine/http_client.h"
#include "causalmine/patterns.h"

namespace causalmine {

struct ConceptAnnotation {
  std::string cui;
  std::string preferred_name;
  std::vector<std::string> semantic_types;
  std::string matched_text;

  bool operator==(const ConceptAnnotation&) const = default;
};

// Exact lookup of a lowercase term. Implementations fill everything except
// matched_text.
class ConceptProvider {
 public:
  virtual ~ConceptProvider() = default;
  virtual std::vector<ConceptAnnotation> exact(const std::string& term) const = 0;
};

// TSV: term<TAB>cui<TAB>preferred_name<TAB>semtype1|semtype2
class DictionaryConceptProvider : public ConceptProvider {
 public:
  static DictionaryConceptProvider load(const std::string& path);
  void add(const std::string& term, ConceptAnnotation concept_entry);
  std::vector<ConceptAnnotation> exact(const std::string& term) const override;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::vector<ConceptAnnotation>> entries_;
};

// GET /concepts?term=... -> [{cui, name, semtypes}]
class HttpConceptProvider : public ConceptProvider {
 public:
  explicit HttpConceptProvider(HttpClientOptions options) : client_(std::move(options)) {}
  std::vector<ConceptAnnotation> exact(const std::string& term) const override;

 private:
  HttpJsonClient client_;
};

// Per-run cache keyed by lowercase term; safe for concurrent lookups.
class CachingConceptProvider : public ConceptProvider {
 public:
  explicit CachingConceptProvider(std::shared_ptr<const ConceptProvider> inner)
      : inner_(std::move(inner)) {}
  std::vector<ConceptAnnotation> exact(const std::string& term) const override;

 private:
  std::shared_ptr<const ConceptProvider> inner_;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::vector<ConceptAnnotation>> cache_;
};

// Case-insensitive. Whole term first; on a miss, the longest contiguous token
// subspans that match (all of them at that length, left to right, CUIs
// deduplicated). Empty on no match.
std::vector<ConceptAnnotation> lookup_concepts(const std::string& term,
                                               const ConceptProvider& provider);

struct EnrichedQuad {
  CausalQuad quad;
  std::vector<ConceptAnnotation> subject_concepts;
  std::vector<ConceptAnnotation> object_concepts;
};

// Annotates subject and object (the trigger is not annotated) and drops quads
// with no concept on either side. Provider failures become
// kEnrichmentIncomplete.
std::vector<EnrichedQuad> enrich_and_filter(const std::vector<CausalQuad>& quads,
                                            const ConceptProvider& provider);

// Re-annotates an already enriched quad; the result equals the input.
EnrichedQuad enrich(const EnrichedQuad& quad, const ConceptProvider& provider);

}  // namespace causalmine

#endif  // CAUSALMINE_CONCEPTS_H_

#ifndef CAUSALMINE_EXPAND_H_
#define CAUSALMINE_EXPAND_H_

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "causalmine/patterns.h"
#include "causalmine/vectors.h"

namespace causalmine {

// term -> synonyms (TSV term<TAB>synonym, one pair per line).
class SynonymLexicon {
 public:
  static SynonymLexicon load(const std::string& path);
  void add(const std::string& term, const std::string& synonym);
  const std::set<std::string>& synonyms(const std::string& term) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, std::set<std::string>> entries_;
};

struct ExpansionConfig {
  double alpha = 0.5;
  std::size_t top_k = 10;
  SynonymLexicon synonyms;
  bool expand_nominals = true;  // false: trigger-only expansion

  void validate() const;
};

struct ExpandedTerm {
  std::string term;
  std::string source_term;
  double confidence = 0.0;
  bool from_synonym = false;
  std::string model_id;  // set when produced by an embedding model
};

// Per model: top_k neighbours with similarity >= alpha (confidence = the
// similarity). Synonyms of the term (confidence 1.0) and of each neighbour
// (the neighbour's confidence) are added. Duplicates keep the highest
// confidence; the term itself is never returned. Sorted by term.
std::vector<ExpandedTerm> expand_term(const std::string& term, const ExpansionConfig& config,
                                      const std::vector<const WordVectorModel*>& models);

// Cartesian substitution over subject head, trigger, and object head; quad
// confidence is the product of the slot confidences. Deduplicated on
// (subject, trigger, object), keeping the highest confidence at the position
// of first occurrence. The seed's own combination keeps the seed's
// provenance; every other combination is kExpanded.
std::vector<CausalQuad> generate_expanded_quads(const std::vector<CausalQuad>& seeds,
                                                const ExpansionConfig& config,
                                                const std::vector<const WordVectorModel*>& models);

// Quads with confidence >= threshold, order preserved.
std::vector<CausalQuad> filter_quads(const std::vector<CausalQuad>& quads,
                                     double threshold = 0.5);

}  // namespace causalmine

#endif  // CAUSALMINE_EXPAND_H_

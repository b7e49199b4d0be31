#ifndef CAUSALMINE_PATTERNS_H_
#define CAUSALMINE_PATTERNS_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "causalmine/text.h"

namespace causalmine {

struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;  // inclusive
};

struct NounPhrase {
  std::string text;   // surface tokens joined by spaces
  std::size_t head_index = 0;
  TokenSpan span;     // span.end == head_index
  std::vector<std::string> lemmas;

  // Lemmas joined by spaces; the canonical phrase used in quads.
  std::string lemma_text() const;
};

struct CandidateTriple {
  NounPhrase subject;
  std::string trigger;  // verb lemma
  NounPhrase object;
  std::string sentence_id;
  std::size_t trigger_index = 0;
};

struct AnnotatedSentence {
  TaggedSentence sentence;
  TokenSpan e1;
  TokenSpan e2;
  std::string relation_label;  // e.g. "Cause-Effect(e1,e2)" or "Other"

  bool is_causal() const;
};

enum class Provenance { kSeed, kExpanded, kPredicted, kExpert };

std::string_view provenance_name(Provenance p);
Provenance parse_provenance(std::string_view name);

struct CausalQuad {
  std::string subject;
  std::string trigger;
  std::string object;
  double confidence = 1.0;
  Provenance provenance = Provenance::kSeed;

  // "subject trigger object": the text that gets embedded.
  std::string phrase() const;
};

// Adjective* Noun+ chunks. Stopword-flagged nouns never head a phrase; they
// are trimmed from the right end, and a run made only of stopword nouns
// yields nothing.
std::vector<NounPhrase> chunk_noun_phrases(const TaggedSentence& sentence);

// Seed quads: one per verb strictly between the e1 and e2 spans, subject and
// object taken from the noun phrases covering the entity heads.
std::vector<CausalQuad> extract_training_quads(const AnnotatedSentence& sentence);

// Distinct verb lemmas found between annotated entities of causal sentences,
// and distinct terms (verbs plus entity phrase heads) over the same set.
struct SeedTermCounts {
  std::size_t unique_verbs = 0;
  std::size_t unique_terms = 0;
};
SeedTermCounts count_seed_terms(const std::vector<AnnotatedSentence>& sentences);

// Verb groups: maximal runs of verb tokens, optionally separated by adverbs
// ("is often triggered"). Returns the group id per token, or -1 for
// non-verbs.
std::vector<int> verb_groups(const TaggedSentence& sentence);

// NP-V-NP candidates in linear order under the nearest-verb rule: no verb
// outside the trigger's own verb group may lie between subject and trigger
// or between trigger and object. Ordered by (subject.start, trigger_index,
// object.start).
std::vector<CandidateTriple> extract_candidate_triples(const TaggedSentence& sentence);

CausalQuad to_quad(const CandidateTriple& triple, double confidence, Provenance provenance);

}  // namespace causalmine

#endif  // CAUSALMINE_PATTERNS_H_

#include "causalmine/patterns.h"

#include <set>

#include "causalmine/error.h"

namespace causalmine {

namespace {

bool is_adverb_tag(std::string_view tag) { return tag.starts_with("RB"); }

NounPhrase make_phrase(const std::vector<Token>& tokens, std::size_t start,
                       std::size_t head) {
  NounPhrase np;
  np.span = {start, head};
  np.head_index = head;
  for (std::size_t i = start; i <= head; ++i) {
    if (!np.text.empty()) np.text.push_back(' ');
    np.text += tokens[i].surface;
    np.lemmas.push_back(tokens[i].lemma);
  }
  return np;
}

// Phrase for an annotated entity span: the chunk whose head falls inside the
// span (rightmost), else the span itself with preceding adjectives.
NounPhrase resolve_entity(const TaggedSentence& s, const std::vector<NounPhrase>& chunks,
                          TokenSpan entity) {
  const NounPhrase* best = nullptr;
  for (const auto& np : chunks) {
    if (np.head_index >= entity.start && np.head_index <= entity.end) best = &np;
  }
  if (best != nullptr) return *best;
  std::size_t start = entity.start;
  while (start > 0 && is_adjective_tag(s.tokens[start - 1].pos)) --start;
  return make_phrase(s.tokens, start, entity.end);
}

}  // namespace

std::string NounPhrase::lemma_text() const {
  std::string out;
  for (const auto& l : lemmas) {
    if (!out.empty()) out.push_back(' ');
    out += l;
  }
  return out;
}

bool AnnotatedSentence::is_causal() const {
  return relation_label.starts_with("Cause-Effect");
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kSeed: return "seed";
    case Provenance::kExpanded: return "expanded";
    case Provenance::kPredicted: return "predicted";
    case Provenance::kExpert: return "expert";
  }
  return "seed";
}

Provenance parse_provenance(std::string_view name) {
  if (name == "seed") return Provenance::kSeed;
  if (name == "expanded") return Provenance::kExpanded;
  if (name == "predicted") return Provenance::kPredicted;
  if (name == "expert") return Provenance::kExpert;
  throw Error(ErrorCode::kMalformedInput, "unknown provenance: " + std::string(name));
}

std::string CausalQuad::phrase() const { return subject + " " + trigger + " " + object; }

std::vector<NounPhrase> chunk_noun_phrases(const TaggedSentence& sentence) {
  const auto& toks = sentence.tokens;
  std::vector<NounPhrase> out;
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!is_adjective_tag(toks[i].pos) && !is_noun_tag(toks[i].pos)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < toks.size() && is_adjective_tag(toks[i].pos)) ++i;
    std::size_t noun_begin = i;
    while (i < toks.size() && is_noun_tag(toks[i].pos)) ++i;
    if (i == noun_begin) continue;  // adjectives with no noun
    std::size_t head = i;
    while (head > noun_begin && toks[head - 1].is_stopword) --head;
    if (head == noun_begin) continue;  // only stopword nouns
    out.push_back(make_phrase(toks, start, head - 1));
  }
  return out;
}

std::vector<CausalQuad> extract_training_quads(const AnnotatedSentence& a) {
  const auto& toks = a.sentence.tokens;
  if (a.e1.end >= toks.size() || a.e2.end >= toks.size() || a.e1.end >= a.e2.start) {
    throw Error(ErrorCode::kInvalidArgument,
                "entity spans out of order or out of range in " + a.sentence.sentence_id);
  }
  auto chunks = chunk_noun_phrases(a.sentence);
  NounPhrase subject = resolve_entity(a.sentence, chunks, a.e1);
  NounPhrase object = resolve_entity(a.sentence, chunks, a.e2);
  std::vector<CausalQuad> out;
  for (std::size_t k = a.e1.end + 1; k < a.e2.start; ++k) {
    if (!is_verb_tag(toks[k].pos)) continue;
    out.push_back(CausalQuad{subject.lemma_text(), toks[k].lemma, object.lemma_text(), 1.0,
                             Provenance::kSeed});
  }
  return out;
}

SeedTermCounts count_seed_terms(const std::vector<AnnotatedSentence>& sentences) {
  std::set<std::string> verbs;
  std::set<std::string> terms;
  for (const auto& a : sentences) {
    if (!a.is_causal()) continue;
    auto quads = extract_training_quads(a);
    for (const auto& q : quads) {
      verbs.insert(q.trigger);
      terms.insert(q.trigger);
    }
    if (!quads.empty()) {
      auto chunks = chunk_noun_phrases(a.sentence);
      terms.insert(a.sentence.tokens[resolve_entity(a.sentence, chunks, a.e1).head_index].lemma);
      terms.insert(a.sentence.tokens[resolve_entity(a.sentence, chunks, a.e2).head_index].lemma);
    }
  }
  return {verbs.size(), terms.size()};
}

std::vector<int> verb_groups(const TaggedSentence& sentence) {
  const auto& toks = sentence.tokens;
  std::vector<int> group(toks.size(), -1);
  int current = -1;
  int next_id = 0;
  std::size_t last_verb = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (is_verb_tag(toks[i].pos)) {
      bool continues = current >= 0;
      for (std::size_t m = last_verb + 1; continues && m < i; ++m) {
        if (!is_adverb_tag(toks[m].pos)) continues = false;
      }
      if (!continues) current = next_id++;
      group[i] = current;
      last_verb = i;
    } else if (!is_adverb_tag(toks[i].pos)) {
      current = -1;
    }
  }
  return group;
}

std::vector<CandidateTriple> extract_candidate_triples(const TaggedSentence& sentence) {
  const auto& toks = sentence.tokens;
  auto nps = chunk_noun_phrases(sentence);
  auto group = verb_groups(sentence);
  std::vector<CandidateTriple> out;
  for (std::size_t i = 0; i < nps.size(); ++i) {
    const auto& subj = nps[i];
    for (std::size_t k = subj.span.end + 1; k < toks.size(); ++k) {
      if (group[k] < 0) continue;
      // A foreign verb between subject and trigger rules out this and every
      // later trigger for this subject.
      bool blocked_left = false;
      for (std::size_t m = subj.span.end + 1; m < k; ++m) {
        if (group[m] >= 0 && group[m] != group[k]) blocked_left = true;
      }
      if (blocked_left) break;
      for (std::size_t j = i + 1; j < nps.size(); ++j) {
        const auto& obj = nps[j];
        if (obj.span.start <= k) continue;
        bool blocked_right = false;
        for (std::size_t m = k + 1; m < obj.span.start; ++m) {
          if (group[m] >= 0 && group[m] != group[k]) blocked_right = true;
        }
        if (blocked_right) break;
        out.push_back(CandidateTriple{subj, toks[k].lemma, obj, sentence.sentence_id, k});
      }
    }
  }
  return out;
}

CausalQuad to_quad(const CandidateTriple& t, double confidence, Provenance provenance) {
  return CausalQuad{t.subject.lemma_text(), t.trigger, t.object.lemma_text(), confidence,
                    provenance};
}

}  // namespace causalmine

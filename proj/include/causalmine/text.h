#ifndef CAUSALMINE_TEXT_H_
#define CAUSALMINE_TEXT_H_

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace causalmine {

enum class DocumentSource { kPlain, kSemevalAnnotated, kPretagged };

struct RawDocument {
  std::string doc_id;
  std::string text;
  DocumentSource source = DocumentSource::kPlain;
};

struct Token {
  std::string surface;
  std::string lemma;  // always lowercase
  std::string pos;    // Penn tag, empty until tagged
  std::size_t index = 0;
  bool is_stopword = false;
};

struct TaggedSentence {
  std::string sentence_id;
  std::string doc_id;
  std::string raw_text;
  std::string normalized_text;
  std::vector<Token> tokens;
};

// Coarse part of speech used to key the lemma lexicon: 'n', 'v', 'a', 'r', or
// '*' for anything else / unknown.
char coarse_pos(std::string_view penn_tag);

bool is_noun_tag(std::string_view tag);
bool is_verb_tag(std::string_view tag);
bool is_adjective_tag(std::string_view tag);

std::string to_lower(std::string_view s);

struct VerbForms {
  std::string base;
  std::string third;       // VBZ
  std::string past;        // VBD
  std::string participle;  // VBN
  std::string gerund;      // VBG
};

// Inflection table behind the builtin lemma lexicon and heuristic tagger.
const std::vector<VerbForms>& builtin_verb_forms();

// (surface_lowercase, coarse POS) -> lemma. Unknown words lemmatize to
// themselves.
class LemmaLexicon {
 public:
  LemmaLexicon() = default;

  // Built-in lexicon covering regular and common irregular inflections of a
  // clinical/causal verb list.
  static LemmaLexicon builtin();
  // TSV lines: surface<TAB>coarse_pos<TAB>lemma. coarse_pos is one of n,v,a,r,*.
  static LemmaLexicon load(const std::string& path);

  void add(std::string_view surface, char coarse, std::string_view lemma);

  // Exact (surface, coarse) entry first; then the wildcard entry; then, if no
  // POS is known yet, the first POS-specific entry in v,n,a,r order.
  std::string lemmatize(std::string_view surface, char coarse = '*') const;

  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::pair<std::string, char>, std::string> entries_;
};

class StopwordSet {
 public:
  StopwordSet() = default;
  explicit StopwordSet(const std::set<std::string>& words) : words_(words.begin(), words.end()) {}

  static StopwordSet english();
  // One word per line; blank lines and lines starting with '#' ignored.
  static StopwordSet load(const std::string& path);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

struct PreprocessOptions {
  std::set<std::string> abbreviations = default_abbreviations();
  std::string special_characters = "-+_*#~^|";
  LemmaLexicon lexicon = LemmaLexicon::builtin();
  StopwordSet stopwords = StopwordSet::english();

  static std::set<std::string> default_abbreviations();
};

std::set<std::string> load_abbreviations(const std::string& path);

std::vector<std::string> split_sentences(
    std::string_view text,
    const std::set<std::string>& abbreviations =
        PreprocessOptions::default_abbreviations());

std::string normalize(std::string_view sentence,
                      std::string_view special_characters = "-+_*#~^|");

// Splits on whitespace and punctuation boundaries. Stopwords are flagged, not
// removed. POS is left empty.
std::vector<Token> tokenize_and_lemmatize(std::string_view normalized,
                                          const LemmaLexicon& lexicon,
                                          const StopwordSet& stopwords);

// Re-runs lemma lookup using each token's POS; call after tagging.
void refine_lemmas(std::vector<Token>& tokens, const LemmaLexicon& lexicon);

// Corpus loaders. A plain file is one document whose id is the file stem;
// JSONL has one {"doc_id", "text"} object per line.
RawDocument load_plain_document(const std::string& path);
std::vector<RawDocument> load_jsonl_documents(const std::string& path);

}  // namespace causalmine

#endif  // CAUSALMINE_TEXT_H_

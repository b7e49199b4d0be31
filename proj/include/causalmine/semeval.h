#ifndef CAUSALMINE_SEMEVAL_H_
#define CAUSALMINE_SEMEVAL_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "causalmine/patterns.h"
#include "causalmine/tagger.h"

namespace causalmine {

// One record of the SemEval 2010 Task 8 file layout:
//
//   8001<TAB>"The <e1>fire</e1> was caused by the <e2>explosion</e2>."
//   Cause-Effect(e2,e1)
//   Comment: ...
//   <blank>
//
// The relation line is absent in the unlabelled test file; labels then come
// from the answer key (`8001<TAB>Cause-Effect(e2,e1)` per line).
struct SemevalRecord {
  std::string id;
  std::string tagged_text;  // quotes stripped, <e1>/<e2> markup kept
  std::string relation;     // empty when unlabelled
  std::string comment;
};

std::vector<SemevalRecord> parse_semeval(std::string_view content);
std::vector<SemevalRecord> load_semeval(const std::string& path);
// Fills missing relation labels from a key file.
void apply_semeval_key(std::vector<SemevalRecord>& records, const std::string& key_path);

// Removes the entity markup.
std::string strip_entity_markup(std::string_view tagged_text);

// Tokenizes each markup segment separately so entity token spans stay exact,
// then tags the full sentence.
AnnotatedSentence annotate(const SemevalRecord& record, const PreprocessOptions& options,
                           const TaggerProvider& tagger);

}  // namespace causalmine

#endif  // CAUSALMINE_SEMEVAL_H_

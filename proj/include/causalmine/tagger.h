#ifndef CAUSALMINE_TAGGER_H_
#define CAUSALMINE_TAGGER_H_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalmine/http_client.h"
#include "causalmine/text.h"

namespace causalmine {

// Supplies one Penn-style tag per token.
class TaggerProvider {
 public:
  virtual ~TaggerProvider() = default;
  virtual std::vector<std::string> tag(std::span<const Token> tokens) const = 0;
};

// Returns tags already attached to the tokens (pre-tagged input). A token
// without a tag is malformed input.
class PassThroughTagger : public TaggerProvider {
 public:
  std::vector<std::string> tag(std::span<const Token> tokens) const override;
};

// POST /tag {tokens: [...]} -> {tags: [...]}
class HttpTagger : public TaggerProvider {
 public:
  explicit HttpTagger(HttpClientOptions options) : client_(std::move(options)) {}
  std::vector<std::string> tag(std::span<const Token> tokens) const override;

 private:
  HttpJsonClient client_;
};

// Lexicon lookup, then suffix rules, then NN.
class HeuristicTagger : public TaggerProvider {
 public:
  HeuristicTagger();  // builtin lexicon
  explicit HeuristicTagger(std::map<std::string, std::string> lexicon)
      : lexicon_(std::move(lexicon)) {}

  // TSV: word<TAB>tag. Entries are merged over the builtin lexicon.
  static HeuristicTagger load(const std::string& path);

  std::vector<std::string> tag(std::span<const Token> tokens) const override;

  const std::map<std::string, std::string>& lexicon() const { return lexicon_; }

 private:
  std::string tag_one(std::span<const Token> tokens, std::size_t i,
                      const std::vector<std::string>& left_tags) const;

  std::map<std::string, std::string> lexicon_;
};

// Fills Token::pos. Throws kMalformedInput when the tagger returns the wrong
// number of tags.
void pos_tag(std::vector<Token>& tokens, const TaggerProvider& tagger);

// "surface/POS surface/POS ..." (split at the last '/').
std::vector<Token> parse_pretagged(std::string_view line);
std::string serialize_pretagged(std::span<const Token> tokens);

// Full preprocessing chain for one document: split, normalize, tokenize,
// tag, refine lemmas. Sentences empty after normalization are dropped.
std::vector<TaggedSentence> preprocess_document(const RawDocument& doc,
                                                const PreprocessOptions& options,
                                                const TaggerProvider& tagger);

// One pre-tagged sentence per line. Special characters are stripped from
// surfaces and parenthesised token runs dropped, mirroring normalize().
std::vector<TaggedSentence> preprocess_pretagged(const std::string& doc_id,
                                                 std::string_view text,
                                                 const PreprocessOptions& options);

}  // namespace causalmine

#endif  // CAUSALMINE_TAGGER_H_

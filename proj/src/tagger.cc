#include "causalmine/tagger.h"

#include <cctype>
#include <fstream>
#include <sstream>

#include "causalmine/error.h"

namespace causalmine {

namespace {

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_number(std::string_view s) {
  bool digit = false;
  for (char c : s) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',') {
      return false;
    }
  }
  return digit;
}

bool has_alnum(std::string_view s) {
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) || static_cast<unsigned char>(c) >= 0x80) {
      return true;
    }
  }
  return false;
}

// Tags after which a verb-looking base/plural form is read as a noun.
bool is_nominal_context(std::string_view left) {
  return left == "DT" || left == "PRP$" || left == "JJ" || left == "JJR" ||
         left == "JJS" || left == "POS" || left == "CD" || left == "IN";
}

std::map<std::string, std::string> builtin_tag_lexicon() {
  std::map<std::string, std::string> lex;
  auto put = [&](std::initializer_list<const char*> words, const char* tag) {
    for (const char* w : words) lex[w] = tag;
  };
  put({"the", "a", "an", "this", "that", "these", "those", "each", "every",
       "some", "any", "no", "all", "both", "another", "either", "neither"},
      "DT");
  put({"of", "in", "on", "at", "by", "for", "with", "from", "into", "through",
       "during", "before", "after", "above", "below", "between", "under",
       "over", "about", "against", "among", "within", "without", "via",
       "because", "since", "although", "though", "while", "whether", "if",
       "than", "as", "upon", "onto", "toward", "towards", "across", "along",
       "around", "behind", "beyond", "despite", "near", "per", "until"},
      "IN");
  put({"and", "or", "but", "nor", "yet"}, "CC");
  put({"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them",
       "itself", "themselves", "himself", "herself"},
      "PRP");
  put({"my", "your", "his", "her", "its", "our", "their"}, "PRP$");
  put({"which", "whatever"}, "WDT");
  put({"who", "whom", "what"}, "WP");
  put({"whose"}, "WP$");
  put({"when", "where", "why", "how"}, "WRB");
  put({"can", "could", "may", "might", "must", "shall", "should", "will",
       "would"},
      "MD");
  put({"to"}, "TO");
  put({"not", "n't", "also", "often", "very", "too", "usually", "frequently",
       "rarely", "sometimes", "always", "never", "then", "there", "here",
       "now", "already", "still", "only", "just", "even", "however", "quickly",
       "fast", "directly", "mainly", "largely", "significantly"},
      "RB");
  put({"more", "less"}, "JJR");
  put({"most", "least"}, "JJS");
  put({"severe", "chronic", "acute", "mild", "high", "low", "new", "old",
       "large", "small", "other", "such", "many", "few", "several", "same",
       "different", "main", "major", "minor", "early", "late", "bad", "good",
       "serious", "common", "rare", "heavy", "poor", "elevated", "red",
       "loud", "sudden", "human"},
      "JJ");
  put({"'s"}, "POS");
  put({"there"}, "EX");

  for (const auto& f : builtin_verb_forms()) {
    lex[f.base] = "VB";
    lex[f.third] = "VBZ";
    lex[f.past] = "VBD";
    lex[f.gerund] = "VBG";
    if (f.participle != f.past) lex[f.participle] = "VBN";
  }
  lex["is"] = "VBZ";
  lex["am"] = "VBP";
  lex["are"] = "VBP";
  lex["was"] = "VBD";
  lex["were"] = "VBD";
  lex["be"] = "VB";
  lex["been"] = "VBN";
  lex["being"] = "VBG";
  lex["has"] = "VBZ";
  lex["have"] = "VBP";
  lex["had"] = "VBD";
  return lex;
}

bool is_be_or_have(std::string_view lower) {
  return lower == "is" || lower == "are" || lower == "was" || lower == "were" ||
         lower == "be" || lower == "been" || lower == "being" || lower == "am" ||
         lower == "has" || lower == "have" || lower == "had" || lower == "having";
}

}  // namespace

std::vector<std::string> PassThroughTagger::tag(std::span<const Token> tokens) const {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (t.pos.empty()) {
      throw Error(ErrorCode::kMalformedInput,
                  "pre-tagged input: token '" + t.surface + "' has no tag");
    }
    tags.push_back(t.pos);
  }
  return tags;
}

std::vector<std::string> HttpTagger::tag(std::span<const Token> tokens) const {
  nlohmann::json body;
  body["tokens"] = nlohmann::json::array();
  for (const auto& t : tokens) body["tokens"].push_back(t.surface);
  nlohmann::json reply = client_.post("/tag", body);
  if (!reply.contains("tags") || !reply["tags"].is_array()) {
    throw Error(ErrorCode::kProviderUnavailable, "tagger reply lacks 'tags' array");
  }
  std::vector<std::string> tags;
  for (const auto& t : reply["tags"]) tags.push_back(t.get<std::string>());
  return tags;
}

HeuristicTagger::HeuristicTagger() : lexicon_(builtin_tag_lexicon()) {}

HeuristicTagger HeuristicTagger::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open tagger lexicon: " + path);
  auto lex = builtin_tag_lexicon();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) + ": expected word<TAB>tag");
    }
    lex[to_lower(line.substr(0, tab))] = line.substr(tab + 1);
  }
  return HeuristicTagger(std::move(lex));
}

std::string HeuristicTagger::tag_one(std::span<const Token> tokens, std::size_t i,
                                     const std::vector<std::string>& left_tags) const {
  const std::string& surface = tokens[i].surface;
  const std::string lower = to_lower(surface);
  const std::string left = i > 0 ? left_tags[i - 1] : "";
  const std::string left_lower = i > 0 ? to_lower(tokens[i - 1].surface) : "";

  if (!has_alnum(surface)) {
    if (surface == "." || surface == "!" || surface == "?") return ".";
    if (surface == "," ) return ",";
    if (surface == ":" || surface == ";") return ":";
    if (surface == "\"" || surface == "'") return "''";
    return "SYM";
  }
  if (is_number(surface)) return "CD";

  if (auto it = lexicon_.find(lower); it != lexicon_.end()) {
    std::string tag = it->second;
    if (tag == "VBD" && is_be_or_have(left_lower)) return "VBN";
    if ((tag == "VB" || tag == "VBP") && is_nominal_context(left)) return "NN";
    if (tag == "VBZ" && (left == "DT" || left == "JJ" || left == "PRP$")) return "NNS";
    if (tag == "VBG" && (i == 0 || left == "DT" || left == "JJ" || left == "PRP$")) {
      return "NN";
    }
    if (tag == "VB" && i > 0 && left != "TO" && left != "MD" && left != "RB") {
      return "VBP";
    }
    return tag;
  }

  if (i > 0 && std::isupper(static_cast<unsigned char>(surface[0]))) return "NNP";
  if (ends_with(lower, "ly")) return "RB";
  for (std::string_view suf : {"ous", "ful", "ive", "able", "ible", "ic", "less", "ary"}) {
    if (ends_with(lower, suf)) return "JJ";
  }
  if (ends_with(lower, "ed")) return is_be_or_have(left_lower) ? "VBN" : "VBD";
  if (ends_with(lower, "ing")) {
    return (i == 0 || is_nominal_context(left)) ? "NN" : "VBG";
  }
  if (ends_with(lower, "s") && !ends_with(lower, "ss") && !ends_with(lower, "us") &&
      !ends_with(lower, "is")) {
    return "NNS";
  }
  return "NN";
}

std::vector<std::string> HeuristicTagger::tag(std::span<const Token> tokens) const {
  std::vector<std::string> tags;
  tags.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) tags.push_back(tag_one(tokens, i, tags));
  return tags;
}

void pos_tag(std::vector<Token>& tokens, const TaggerProvider& tagger) {
  std::vector<std::string> tags = tagger.tag(tokens);
  if (tags.size() != tokens.size()) {
    throw Error(ErrorCode::kMalformedInput,
                "tagger returned " + std::to_string(tags.size()) + " tags for " +
                    std::to_string(tokens.size()) + " tokens");
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tags[i].empty()) {
      throw Error(ErrorCode::kMalformedInput, "empty tag for token " + tokens[i].surface);
    }
    tokens[i].pos = std::move(tags[i]);
  }
}

std::vector<Token> parse_pretagged(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t untagged = 0;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    std::string_view item = line.substr(i, j - i);
    i = j;
    Token t;
    t.index = tokens.size();
    auto slash = item.rfind('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 == item.size()) {
      ++untagged;
      t.surface = std::string(item);
    } else {
      t.surface = std::string(item.substr(0, slash));
      t.pos = std::string(item.substr(slash + 1));
    }
    t.lemma = to_lower(t.surface);
    tokens.push_back(std::move(t));
  }
  if (untagged > 0) {
    throw Error(ErrorCode::kMalformedInput,
                "pre-tagged line has " + std::to_string(tokens.size()) + " tokens but " +
                    std::to_string(tokens.size() - untagged) + " tags");
  }
  return tokens;
}

std::string serialize_pretagged(std::span<const Token> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t.surface;
    out.push_back('/');
    out += t.pos;
  }
  return out;
}

std::vector<TaggedSentence> preprocess_document(const RawDocument& doc,
                                                const PreprocessOptions& options,
                                                const TaggerProvider& tagger) {
  if (doc.source == DocumentSource::kPretagged) {
    return preprocess_pretagged(doc.doc_id, doc.text, options);
  }
  std::vector<TaggedSentence> out;
  std::size_t n = 0;
  for (auto& raw : split_sentences(doc.text, options.abbreviations)) {
    std::string norm = normalize(raw, options.special_characters);
    if (norm.empty()) continue;
    TaggedSentence s;
    s.doc_id = doc.doc_id;
    s.sentence_id = doc.doc_id + "#" + std::to_string(n++);
    s.tokens = tokenize_and_lemmatize(norm, options.lexicon, options.stopwords);
    pos_tag(s.tokens, tagger);
    refine_lemmas(s.tokens, options.lexicon);
    s.raw_text = std::move(raw);
    s.normalized_text = std::move(norm);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaggedSentence> preprocess_pretagged(const std::string& doc_id,
                                                 std::string_view text,
                                                 const PreprocessOptions& options) {
  std::vector<TaggedSentence> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t n = 0;
  PassThroughTagger passthrough;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<Token> parsed = parse_pretagged(line);
    if (parsed.empty()) continue;
    std::vector<Token> kept;
    int depth = 0;
    for (auto& t : parsed) {
      if (t.surface == "(" || t.pos == "-LRB-") {
        ++depth;
        continue;
      }
      if (t.surface == ")" || t.pos == "-RRB-") {
        if (depth > 0) --depth;
        continue;
      }
      if (depth > 0) continue;
      std::string cleaned;
      for (char c : t.surface) {
        if (options.special_characters.find(c) == std::string::npos) cleaned.push_back(c);
      }
      if (cleaned.empty()) continue;
      t.surface = std::move(cleaned);
      t.index = kept.size();
      t.is_stopword = options.stopwords.contains(t.surface);
      kept.push_back(std::move(t));
    }
    if (kept.empty()) continue;
    pos_tag(kept, passthrough);
    refine_lemmas(kept, options.lexicon);
    TaggedSentence s;
    s.doc_id = doc_id;
    s.sentence_id = doc_id + "#" + std::to_string(n++);
    s.raw_text = line;
    for (const auto& t : kept) {
      if (!s.normalized_text.empty()) s.normalized_text.push_back(' ');
      s.normalized_text += t.surface;
    }
    s.tokens = std::move(kept);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace causalmine

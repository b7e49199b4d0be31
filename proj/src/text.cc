#include "causalmine/text.h"

#include <algorithm>
#include <map>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "causalmine/error.h"
#include "json.hpp"

namespace causalmine {

namespace {

// Regular verbs whose inflections are generated for the builtin lexicon.
constexpr const char* kRegularVerbs[] = {
    "cause",     "trigger",   "produce",   "generate",  "induce",
    "provoke",   "create",    "result",    "lead",      "contribute",
    "increase",  "decrease",  "reduce",    "elevate",   "worsen",
    "improve",   "prevent",   "inhibit",   "stimulate", "activate",
    "affect",    "damage",    "injure",    "kill",      "infect",
    "spread",    "transmit",  "develop",   "form",      "emit",
    "release",   "raise",     "lower",     "block",     "destroy",
    "harm",      "irritate",  "inflame",   "exacerbate", "aggravate",
    "precipitate", "initiate", "evoke",    "elicit",    "yield",
    "contain",   "comment",   "impose",    "use",       "treat",
    "diagnose",  "report",    "suggest",   "show",      "indicate",
    "associate", "relate",    "link",      "attribute", "follow",
    "occur",     "appear",    "need",      "want",      "help",
    "start",     "stop",      "end",       "open",      "close",
    "move",      "live",      "work",      "play",      "call",
    "ask",       "look",      "seem",      "turn",      "try",
    "happen",    "remain",    "involve",   "require",   "receive",
    "present",   "complain",  "suffer",    "exhibit",   "experience",
    "manifest",  "accompany", "underlie",  "explode",   "burn",
    "smoke"};

struct Irregular {
  const char* base;
  const char* third;
  const char* past;
  const char* participle;
  const char* gerund;
};

constexpr Irregular kIrregularVerbs[] = {
    {"be", "is", "was", "been", "being"},
    {"have", "has", "had", "had", "having"},
    {"do", "does", "did", "done", "doing"},
    {"make", "makes", "made", "made", "making"},
    {"bring", "brings", "brought", "brought", "bringing"},
    {"give", "gives", "gave", "given", "giving"},
    {"take", "takes", "took", "taken", "taking"},
    {"get", "gets", "got", "gotten", "getting"},
    {"go", "goes", "went", "gone", "going"},
    {"come", "comes", "came", "come", "coming"},
    {"see", "sees", "saw", "seen", "seeing"},
    {"know", "knows", "knew", "known", "knowing"},
    {"think", "thinks", "thought", "thought", "thinking"},
    {"find", "finds", "found", "found", "finding"},
    {"leave", "leaves", "left", "left", "leaving"},
    {"keep", "keeps", "kept", "kept", "keeping"},
    {"begin", "begins", "began", "begun", "beginning"},
    {"run", "runs", "ran", "run", "running"},
    {"drive", "drives", "drove", "driven", "driving"},
    {"arise", "arises", "arose", "arisen", "arising"},
    {"break", "breaks", "broke", "broken", "breaking"},
    {"fall", "falls", "fell", "fallen", "falling"},
    {"grow", "grows", "grew", "grown", "growing"},
    {"say", "says", "said", "said", "saying"},
};

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

std::string third_person(const std::string& base) {
  auto ends = [&](std::string_view suf) {
    return base.size() >= suf.size() &&
           base.compare(base.size() - suf.size(), suf.size(), suf) == 0;
  };
  if (ends("s") || ends("x") || ends("z") || ends("ch") || ends("sh")) {
    return base + "es";
  }
  if (base.size() > 1 && base.back() == 'y' && !is_vowel(base[base.size() - 2])) {
    return base.substr(0, base.size() - 1) + "ies";
  }
  return base + "s";
}

std::string past_tense(const std::string& base) {
  if (base.back() == 'e') return base + "d";
  if (base.size() > 1 && base.back() == 'y' && !is_vowel(base[base.size() - 2])) {
    return base.substr(0, base.size() - 1) + "ied";
  }
  return base + "ed";
}

std::string gerund(const std::string& base) {
  if (base.size() > 2 && base.back() == 'e' && base[base.size() - 2] != 'e') {
    return base.substr(0, base.size() - 1) + "ing";
  }
  return base + "ing";
}

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

// Word ending at position `end` (exclusive), i.e. the run of non-space chars.
std::string_view word_before(std::string_view text, std::size_t end) {
  std::size_t b = end;
  while (b > 0 && !is_space(text[b - 1])) --b;
  return text.substr(b, end - b);
}

bool is_word_char(unsigned char c) {
  return std::isalnum(c) != 0 || c >= 0x80;
}

}  // namespace

char coarse_pos(std::string_view tag) {
  if (tag.starts_with("NN")) return 'n';
  if (tag.starts_with("VB")) return 'v';
  if (tag.starts_with("JJ")) return 'a';
  if (tag.starts_with("RB")) return 'r';
  return '*';
}

bool is_noun_tag(std::string_view tag) { return tag.starts_with("NN"); }
bool is_verb_tag(std::string_view tag) { return tag.starts_with("VB"); }
bool is_adjective_tag(std::string_view tag) { return tag.starts_with("JJ"); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<VerbForms>& builtin_verb_forms() {
  static const std::vector<VerbForms> forms = [] {
    std::map<std::string, std::string> overrides = {
        {"lead", "led"}, {"spread", "spread"}, {"stop", "stopped"},
        {"underlie", "underlay"}};
    std::vector<VerbForms> out;
    for (const char* v : kRegularVerbs) {
      std::string base = v;
      std::string past = past_tense(base);
      if (auto it = overrides.find(base); it != overrides.end()) past = it->second;
      std::string ing = base == "stop" ? "stopping"
                        : base == "underlie" ? "underlying"
                                             : gerund(base);
      std::string participle = base == "underlie" ? "underlain" : past;
      out.push_back({base, third_person(base), past, participle, ing});
    }
    for (const auto& irr : kIrregularVerbs) {
      out.push_back({irr.base, irr.third, irr.past, irr.participle, irr.gerund});
    }
    return out;
  }();
  return forms;
}

LemmaLexicon LemmaLexicon::builtin() {
  LemmaLexicon lex;
  for (const auto& f : builtin_verb_forms()) {
    for (const std::string* s : {&f.base, &f.third, &f.past, &f.participle, &f.gerund}) {
      lex.add(*s, 'v', f.base);
    }
  }
  for (const char* f : {"am", "are", "were"}) lex.add(f, 'v', "be");
  return lex;
}

LemmaLexicon LemmaLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open lemma lexicon: " + path);
  LemmaLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, '\t')) cols.push_back(col);
    if (cols.size() != 3 || cols[1].size() != 1) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) +
                      ": expected surface<TAB>pos<TAB>lemma");
    }
    lex.add(cols[0], cols[1][0], cols[2]);
  }
  return lex;
}

void LemmaLexicon::add(std::string_view surface, char coarse, std::string_view lemma) {
  entries_[{to_lower(surface), coarse}] = to_lower(lemma);
}

std::string LemmaLexicon::lemmatize(std::string_view surface, char coarse) const {
  std::string key = to_lower(surface);
  if (auto it = entries_.find({key, coarse}); it != entries_.end()) return it->second;
  if (auto it = entries_.find({key, '*'}); it != entries_.end()) return it->second;
  if (coarse == '*') {
    for (char c : {'v', 'n', 'a', 'r'}) {
      if (auto it = entries_.find({key, c}); it != entries_.end()) return it->second;
    }
  }
  return key;
}

StopwordSet StopwordSet::english() {
  static const char* const kWords[] = {
      "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you",
      "you're", "you've", "you'll", "you'd", "your", "yours", "yourself",
      "yourselves", "he", "him", "his", "himself", "she", "she's", "her",
      "hers", "herself", "it", "it's", "its", "itself", "they", "them",
      "their", "theirs", "themselves", "what", "which", "who", "whom", "this",
      "that", "that'll", "these", "those", "am", "is", "are", "was", "were",
      "be", "been", "being", "have", "has", "had", "having", "do", "does",
      "did", "doing", "a", "an", "the", "and", "but", "if", "or", "because",
      "as", "until", "while", "of", "at", "by", "for", "with", "about",
      "against", "between", "into", "through", "during", "before", "after",
      "above", "below", "to", "from", "up", "down", "in", "out", "on", "off",
      "over", "under", "again", "further", "then", "once", "here", "there",
      "when", "where", "why", "how", "all", "any", "both", "each", "few",
      "more", "most", "other", "some", "such", "no", "nor", "not", "only",
      "own", "same", "so", "than", "too", "very", "s", "t", "can", "will",
      "just", "don", "don't", "should", "should've", "now", "d", "ll", "m",
      "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't",
      "didn", "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn",
      "hasn't", "haven", "haven't", "isn", "isn't", "ma", "mightn",
      "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
      "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won",
      "won't", "wouldn", "wouldn't"};
  std::set<std::string> words(std::begin(kWords), std::end(kWords));
  return StopwordSet(std::move(words));
}

StopwordSet StopwordSet::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open stopword list: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = trim(line);
    if (w.empty() || w[0] == '#') continue;
    words.insert(to_lower(w));
  }
  return StopwordSet(std::move(words));
}

bool StopwordSet::contains(std::string_view word) const {
  return words_.find(to_lower(word)) != words_.end();
}

std::set<std::string> PreprocessOptions::default_abbreviations() {
  return {"Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "St.", "vs.", "etc.",
          "e.g.", "i.e.", "et al.", "al.", "Fig.", "approx.", "No.", "Jr.",
          "Sr.", "cf."};
}

std::set<std::string> load_abbreviations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open abbreviation list: " + path);
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = trim(line);
    if (!w.empty() && w[0] != '#') out.insert(w);
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text,
                                         const std::set<std::string>& abbreviations) {
  std::set<std::string> abbrev_lower;
  for (const auto& a : abbreviations) abbrev_lower.insert(to_lower(a));

  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_terminal(text[i])) continue;
    std::size_t j = i + 1;
    if (j < text.size() && !is_space(text[j])) continue;
    std::size_t k = j;
    while (k < text.size() && is_space(text[k])) ++k;
    bool boundary = k == text.size() ||
                    std::isupper(static_cast<unsigned char>(text[k])) != 0;
    if (!boundary) continue;
    if (text[i] == '.' &&
        abbrev_lower.count(to_lower(word_before(text, i + 1))) != 0) {
      continue;
    }
    std::string sentence = trim(text.substr(start, j - start));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    start = k;
    i = k == 0 ? 0 : k - 1;
  }
  if (start < text.size()) {
    std::string tail = trim(text.substr(start));
    if (!tail.empty()) out.push_back(std::move(tail));
  }
  return out;
}

std::string normalize(std::string_view sentence, std::string_view special_characters) {
  std::string s(sentence);
  // Innermost parenthetical spans first, repeated until none remain.
  for (;;) {
    std::size_t close = s.find(')');
    if (close == std::string::npos) break;
    std::size_t open = s.rfind('(', close);
    if (open == std::string::npos) {
      s.erase(close, 1);  // stray ')'
      continue;
    }
    s.replace(open, close - open + 1, " ");
  }
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '(') continue;  // unmatched
    if (special_characters.find(c) != std::string_view::npos) continue;
    out.push_back(c);
  }
  return collapse_whitespace(out);
}

std::vector<Token> tokenize_and_lemmatize(std::string_view normalized,
                                          const LemmaLexicon& lexicon,
                                          const StopwordSet& stopwords) {
  std::vector<std::string> pieces;
  std::size_t i = 0;
  const std::size_t n = normalized.size();
  while (i < n) {
    unsigned char c = static_cast<unsigned char>(normalized[i]);
    if (is_space(static_cast<char>(c))) {
      ++i;
      continue;
    }
    if (is_word_char(c)) {
      std::size_t b = i;
      while (i < n) {
        unsigned char d = static_cast<unsigned char>(normalized[i]);
        if (is_word_char(d)) {
          ++i;
        } else if ((d == '.' || d == ',') && i + 1 < n && i > b &&
                   std::isdigit(static_cast<unsigned char>(normalized[i - 1])) &&
                   std::isdigit(static_cast<unsigned char>(normalized[i + 1]))) {
          ++i;  // 2.5, 1,000
        } else if (d == '\'' && i + 1 < n &&
                   std::isalpha(static_cast<unsigned char>(normalized[i + 1]))) {
          bool possessive =
              (normalized[i + 1] == 's' || normalized[i + 1] == 'S') &&
              (i + 2 == n || !is_word_char(static_cast<unsigned char>(normalized[i + 2])));
          if (possessive) break;
          ++i;  // don't, o'clock
        } else {
          break;
        }
      }
      pieces.emplace_back(normalized.substr(b, i - b));
      continue;
    }
    if (c == '\'' && i + 1 < n && (normalized[i + 1] == 's' || normalized[i + 1] == 'S') &&
        (i + 2 == n || !is_word_char(static_cast<unsigned char>(normalized[i + 2])))) {
      pieces.emplace_back(normalized.substr(i, 2));  // possessive 's
      i += 2;
      continue;
    }
    pieces.emplace_back(1, static_cast<char>(c));
    ++i;
  }

  std::vector<Token> tokens;
  tokens.reserve(pieces.size());
  for (auto& p : pieces) {
    Token t;
    t.index = tokens.size();
    t.lemma = lexicon.lemmatize(p);
    t.is_stopword = stopwords.contains(p);
    t.surface = std::move(p);
    tokens.push_back(std::move(t));
  }
  return tokens;
}

void refine_lemmas(std::vector<Token>& tokens, const LemmaLexicon& lexicon) {
  for (auto& t : tokens) t.lemma = lexicon.lemmatize(t.surface, coarse_pos(t.pos));
}

RawDocument load_plain_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return RawDocument{std::filesystem::path(path).stem().string(), ss.str(),
                     DocumentSource::kPlain};
}

std::vector<RawDocument> load_jsonl_documents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open corpus file: " + path);
  std::vector<RawDocument> docs;
  std::set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("doc_id") || !j.contains("text") || !j["doc_id"].is_string() ||
        !j["text"].is_string()) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) + ": expected {doc_id, text}");
    }
    RawDocument d{j["doc_id"].get<std::string>(), j["text"].get<std::string>(),
                  DocumentSource::kPlain};
    if (!seen.insert(d.doc_id).second) {
      throw Error(ErrorCode::kMalformedInput, "duplicate doc_id: " + d.doc_id);
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace causalmine

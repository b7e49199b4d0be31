#include "causalmine/semeval.h"

#include <fstream>
#include <sstream>

#include "causalmine/error.h"

namespace causalmine {

namespace {

std::string trim_copy(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool looks_like_sentence_line(const std::string& line) {
  auto tab = line.find('\t');
  if (tab == std::string::npos || tab == 0) return false;
  for (std::size_t i = 0; i < tab; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(line[i]))) return false;
  }
  return true;
}

}  // namespace

std::vector<SemevalRecord> parse_semeval(std::string_view content) {
  std::vector<SemevalRecord> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  SemevalRecord* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim_copy(line);
    if (t.empty()) {
      current = nullptr;
      continue;
    }
    if (looks_like_sentence_line(line)) {
      auto tab = line.find('\t');
      SemevalRecord r;
      r.id = line.substr(0, tab);
      std::string text = trim_copy(std::string_view(line).substr(tab + 1));
      if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
        text = text.substr(1, text.size() - 2);
      }
      if (text.find("<e1>") == std::string::npos || text.find("</e1>") == std::string::npos ||
          text.find("<e2>") == std::string::npos || text.find("</e2>") == std::string::npos) {
        throw Error(ErrorCode::kMalformedInput,
                    "line " + std::to_string(lineno) + ": missing <e1>/<e2> markup");
      }
      r.tagged_text = std::move(text);
      out.push_back(std::move(r));
      current = &out.back();
      continue;
    }
    if (current == nullptr) {
      throw Error(ErrorCode::kMalformedInput,
                  "line " + std::to_string(lineno) + ": expected '<id><TAB>\"sentence\"'");
    }
    if (t.starts_with("Comment:")) {
      current->comment = trim_copy(std::string_view(t).substr(8));
    } else if (current->relation.empty()) {
      current->relation = t;
    } else {
      throw Error(ErrorCode::kMalformedInput,
                  "line " + std::to_string(lineno) + ": unexpected line in record " +
                      current->id);
    }
  }
  return out;
}

std::vector<SemevalRecord> load_semeval(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open SemEval file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_semeval(ss.str());
}

void apply_semeval_key(std::vector<SemevalRecord>& records, const std::string& key_path) {
  std::ifstream in(key_path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open SemEval key: " + key_path);
  std::map<std::string, std::string> key;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim_copy(line);
    if (t.empty()) continue;
    auto tab = t.find('\t');
    if (tab == std::string::npos) {
      throw Error(ErrorCode::kMalformedInput, "bad key line: " + t);
    }
    key[t.substr(0, tab)] = trim_copy(std::string_view(t).substr(tab + 1));
  }
  for (auto& r : records) {
    if (!r.relation.empty()) continue;
    auto it = key.find(r.id);
    if (it == key.end()) throw Error(ErrorCode::kNotFound, "no key entry for " + r.id);
    r.relation = it->second;
  }
}

std::string strip_entity_markup(std::string_view tagged) {
  std::string out(tagged);
  for (const char* tag : {"<e1>", "</e1>", "<e2>", "</e2>"}) {
    std::string_view t(tag);
    for (auto pos = out.find(t); pos != std::string::npos; pos = out.find(t)) {
      out.erase(pos, t.size());
    }
  }
  return out;
}

AnnotatedSentence annotate(const SemevalRecord& record, const PreprocessOptions& options,
                           const TaggerProvider& tagger) {
  const std::string& s = record.tagged_text;
  auto e1_open = s.find("<e1>");
  auto e1_close = s.find("</e1>");
  auto e2_open = s.find("<e2>");
  auto e2_close = s.find("</e2>");
  if (!(e1_open < e1_close && e1_close < e2_open && e2_open < e2_close) ||
      e2_close == std::string::npos) {
    throw Error(ErrorCode::kMalformedInput, "record " + record.id + ": entity markup out of order");
  }
  std::string_view sv(s);
  std::string_view segments[5] = {
      sv.substr(0, e1_open),
      sv.substr(e1_open + 4, e1_close - e1_open - 4),
      sv.substr(e1_close + 5, e2_open - e1_close - 5),
      sv.substr(e2_open + 4, e2_close - e2_open - 4),
      sv.substr(e2_close + 5),
  };

  AnnotatedSentence a;
  a.relation_label = record.relation;
  a.sentence.doc_id = record.id;
  a.sentence.sentence_id = record.id;
  a.sentence.raw_text = strip_entity_markup(s);
  TokenSpan spans[5];
  for (int seg = 0; seg < 5; ++seg) {
    std::string norm = normalize(segments[seg], options.special_characters);
    auto toks = tokenize_and_lemmatize(norm, options.lexicon, options.stopwords);
    spans[seg].start = a.sentence.tokens.size();
    for (auto& t : toks) {
      t.index = a.sentence.tokens.size();
      a.sentence.tokens.push_back(std::move(t));
    }
    if ((seg == 1 || seg == 3) && toks.empty()) {
      throw Error(ErrorCode::kMalformedInput,
                  "record " + record.id + ": entity normalizes to nothing");
    }
    spans[seg].end = a.sentence.tokens.empty() ? 0 : a.sentence.tokens.size() - 1;
    if (!norm.empty()) {
      if (!a.sentence.normalized_text.empty()) a.sentence.normalized_text.push_back(' ');
      a.sentence.normalized_text += norm;
    }
  }
  a.e1 = spans[1];
  a.e2 = spans[3];
  pos_tag(a.sentence.tokens, tagger);
  refine_lemmas(a.sentence.tokens, options.lexicon);
  return a;
}

}  // namespace causalmine

// Shared test helpers and independent oracles. Nothing here calls into the
// library code it is used to check.
#ifndef CAUSALMINE_TESTS_HELPERS_H_
#define CAUSALMINE_TESTS_HELPERS_H_

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "causalmine/text.h"

namespace testing_support {

namespace fs = std::filesystem;

inline std::string fixtures_dir() { return CAUSALMINE_FIXTURES; }
inline std::string fixture(const std::string& name) { return fixtures_dir() + "/" + name; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("causalmine-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline void write_file(const std::string& path, const std::string& content) {
  fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// "w/TAG w/TAG ..." -> tokens with surface, lowercase lemma, tag, index.
// A trailing '*' on the surface marks a stopword: "it*/PRP".
inline causalmine::TaggedSentence tagged(const std::string& line, const std::string& id = "s") {
  causalmine::TaggedSentence s;
  s.sentence_id = id;
  s.doc_id = id;
  s.raw_text = line;
  std::istringstream in(line);
  std::string item;
  while (in >> item) {
    const auto slash = item.rfind('/');
    causalmine::Token t;
    t.surface = item.substr(0, slash);
    t.pos = item.substr(slash + 1);
    if (!t.surface.empty() && t.surface.back() == '*') {
      t.surface.pop_back();
      t.is_stopword = true;
    }
    for (char c : t.surface) t.lemma.push_back(static_cast<char>(std::tolower(c)));
    t.index = s.tokens.size();
    s.tokens.push_back(t);
  }
  return s;
}

// --- extraction oracle ------------------------------------------------------

inline bool o_noun(const std::string& t) { return t.size() >= 2 && t[0] == 'N' && t[1] == 'N'; }
inline bool o_verb(const std::string& t) { return t.size() >= 2 && t[0] == 'V' && t[1] == 'B'; }
inline bool o_adj(const std::string& t) { return t.size() >= 2 && t[0] == 'J' && t[1] == 'J'; }
inline bool o_adv(const std::string& t) { return t.size() >= 2 && t[0] == 'R' && t[1] == 'B'; }

struct OracleSpan {
  std::size_t start, end;
  bool operator<(const OracleSpan& o) const { return std::tie(start, end) < std::tie(o.start, o.end); }
  bool operator==(const OracleSpan& o) const { return start == o.start && end == o.end; }
};

// An NP ends at a non-stopword noun that has only stopword nouns between it
// and the end of its noun run; it starts at the beginning of that noun run,
// extended left over adjectives.
inline std::vector<OracleSpan> oracle_chunks(const causalmine::TaggedSentence& s) {
  const auto& t = s.tokens;
  const std::size_t n = t.size();
  std::vector<OracleSpan> out;
  for (std::size_t h = 0; h < n; ++h) {
    if (!o_noun(t[h].pos) || t[h].is_stopword) continue;
    bool last = true;
    for (std::size_t j = h + 1; j < n && o_noun(t[j].pos); ++j)
      if (!t[j].is_stopword) last = false;
    if (!last) continue;
    std::size_t start = h;
    while (start > 0 && o_noun(t[start - 1].pos)) --start;
    while (start > 0 && o_adj(t[start - 1].pos)) --start;
    out.push_back({start, h});
  }
  return out;
}

// Same verb group: every token from one to the other is a verb or adverb.
inline bool oracle_same_group(const causalmine::TaggedSentence& s, std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  for (std::size_t i = a; i <= b; ++i)
    if (!o_verb(s.tokens[i].pos) && !o_adv(s.tokens[i].pos)) return false;
  return true;
}

using OracleTriple = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t, std::size_t>;
// (subject.start, subject.end, trigger, object.start, object.end)

inline std::vector<OracleTriple> oracle_triples(const causalmine::TaggedSentence& s) {
  const auto nps = oracle_chunks(s);
  const std::size_t n = s.tokens.size();
  std::vector<OracleTriple> out;
  for (const auto& subj : nps)
    for (std::size_t k = 0; k < n; ++k)
      for (const auto& obj : nps) {
        if (!o_verb(s.tokens[k].pos)) continue;
        if (!(subj.end < k && k < obj.start)) continue;
        bool blocked = false;
        for (std::size_t v = subj.end + 1; v < obj.start && !blocked; ++v)
          if (v != k && o_verb(s.tokens[v].pos) && !oracle_same_group(s, v, k)) blocked = true;
        if (!blocked) out.emplace_back(subj.start, subj.end, k, obj.start, obj.end);
      }
  std::sort(out.begin(), out.end(), [](const OracleTriple& a, const OracleTriple& b) {
    return std::make_tuple(std::get<0>(a), std::get<2>(a), std::get<3>(a)) <
           std::make_tuple(std::get<0>(b), std::get<2>(b), std::get<3>(b));
  });
  return out;
}

// Random tagged sentence of 1..max_len tokens over a small tag inventory.
inline causalmine::TaggedSentence random_sentence(std::mt19937_64& rng, std::size_t max_len,
                                                  const std::string& id) {
  // weighted towards nouns and verbs so most sentences hold a triple
  static const std::vector<std::string> tags = {"NN", "NN",  "NN",  "NNS", "NNP", "JJ", "JJ",
                                                "JJR", "VB", "VBZ", "VBZ", "VBD", "VBN", "VBG",
                                                "RB", "RB", "DT",  "IN",  "CC"};
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, tags.size() - 1);
  std::bernoulli_distribution stop(0.15);
  causalmine::TaggedSentence s;
  s.sentence_id = id;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    causalmine::Token t;
    t.pos = tags[pick(rng)];
    t.surface = "w" + std::to_string(i);
    t.lemma = t.surface;
    t.index = i;
    t.is_stopword = stop(rng);
    s.tokens.push_back(t);
  }
  return s;
}

// --- numeric oracles --------------------------------------------------------

template <typename A, typename B>
double oracle_cosine(const A& a, const B& b) {
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<long double>(a[i]) * b[i];
    na += static_cast<long double>(a[i]) * a[i];
    nb += static_cast<long double>(b[i]) * b[i];
  }
  return static_cast<double>(dot / (std::sqrt(na) * std::sqrt(nb)));
}

}  // namespace testing_support

#endif  // CAUSALMINE_TESTS_HELPERS_H_

#include "causalmine/expand.h"

#include <algorithm>
#include <fstream>
#include <tuple>
#include <unordered_map>

#include "causalmine/error.h"
#include "causalmine/text.h"

namespace causalmine {

namespace {

struct Alternative {
  std::string text;
  double confidence;
};

std::string last_word(const std::string& phrase) {
  auto sp = phrase.rfind(' ');
  return sp == std::string::npos ? phrase : phrase.substr(sp + 1);
}

std::string replace_last_word(const std::string& phrase, const std::string& word) {
  auto sp = phrase.rfind(' ');
  return sp == std::string::npos ? word : phrase.substr(0, sp + 1) + word;
}

// Original first, then expansions by confidence desc, term asc.
std::vector<Alternative> alternatives(
    const std::string& phrase, bool expand, const ExpansionConfig& config,
    const std::vector<const WordVectorModel*>& models,
    std::unordered_map<std::string, std::vector<ExpandedTerm>>& cache) {
  std::vector<Alternative> out{{phrase, 1.0}};
  if (!expand) return out;
  std::string head = last_word(phrase);
  auto it = cache.find(head);
  if (it == cache.end()) it = cache.emplace(head, expand_term(head, config, models)).first;
  std::vector<ExpandedTerm> sorted = it->second;
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.confidence > b.confidence;
  });
  for (const auto& e : sorted) out.push_back({replace_last_word(phrase, e.term), e.confidence});
  return out;
}

}  // namespace

SynonymLexicon SynonymLexicon::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open synonym lexicon: " + path);
  SynonymLexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) + ": expected term<TAB>synonym");
    }
    lex.add(line.substr(0, tab), line.substr(tab + 1));
  }
  return lex;
}

void SynonymLexicon::add(const std::string& term, const std::string& synonym) {
  entries_[to_lower(term)].insert(to_lower(synonym));
}

const std::set<std::string>& SynonymLexicon::synonyms(const std::string& term) const {
  static const std::set<std::string> kEmpty;
  auto it = entries_.find(term);
  return it == entries_.end() ? kEmpty : it->second;
}

void ExpansionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0, 1]");
  }
  if (top_k < 1) throw Error(ErrorCode::kInvalidArgument, "top_k must be >= 1");
}

std::vector<ExpandedTerm> expand_term(const std::string& term, const ExpansionConfig& config,
                                      const std::vector<const WordVectorModel*>& models) {
  config.validate();
  std::map<std::string, ExpandedTerm> best;
  auto offer = [&](ExpandedTerm e) {
    if (e.term == term || e.term.empty()) return;
    auto it = best.find(e.term);
    if (it == best.end()) {
      best.emplace(e.term, std::move(e));
    } else if (e.confidence > it->second.confidence) {
      it->second = std::move(e);
    }
  };

  for (const auto& syn : config.synonyms.synonyms(term)) {
    offer(ExpandedTerm{syn, term, 1.0, true, ""});
  }
  for (const WordVectorModel* model : models) {
    for (auto& [neighbour, score] : model->most_similar(term, config.top_k, config.alpha)) {
      offer(ExpandedTerm{neighbour, term, score, false, model->model_id()});
      for (const auto& syn : config.synonyms.synonyms(neighbour)) {
        offer(ExpandedTerm{syn, neighbour, score, true, ""});
      }
    }
  }
  std::vector<ExpandedTerm> out;
  out.reserve(best.size());
  for (auto& [_, e] : best) out.push_back(std::move(e));
  return out;
}

std::vector<CausalQuad> generate_expanded_quads(const std::vector<CausalQuad>& seeds,
                                                const ExpansionConfig& config,
                                                const std::vector<const WordVectorModel*>& models) {
  std::unordered_map<std::string, std::vector<ExpandedTerm>> cache;
  std::vector<CausalQuad> out;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> seen;
  for (const auto& seed : seeds) {
    auto subjects = alternatives(seed.subject, config.expand_nominals, config, models, cache);
    auto triggers = alternatives(seed.trigger, true, config, models, cache);
    auto objects = alternatives(seed.object, config.expand_nominals, config, models, cache);
    for (const auto& s : subjects) {
      for (const auto& t : triggers) {
        for (const auto& o : objects) {
          double conf = seed.confidence * s.confidence * t.confidence * o.confidence;
          const bool original =
              s.text == seed.subject && t.text == seed.trigger && o.text == seed.object;
          auto key = std::make_tuple(s.text, t.text, o.text);
          auto it = seen.find(key);
          if (it != seen.end()) {
            CausalQuad& q = out[it->second];
            q.confidence = std::max(q.confidence, conf);
            if (original) q.provenance = seed.provenance;
            continue;
          }
          seen.emplace(std::move(key), out.size());
          out.push_back(CausalQuad{s.text, t.text, o.text, conf,
                                   original ? seed.provenance : Provenance::kExpanded});
        }
      }
    }
  }
  return out;
}

std::vector<CausalQuad> filter_quads(const std::vector<CausalQuad>& quads, double threshold) {
  std::vector<CausalQuad> out;
  std::copy_if(quads.begin(), quads.end(), std::back_inserter(out),
               [&](const CausalQuad& q) { return q.confidence >= threshold; });
  return out;
}

}  // namespace causalmine

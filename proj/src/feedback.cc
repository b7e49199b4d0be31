#include "causalmine/feedback.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "causalmine/error.h"

namespace causalmine {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Howard Hinnant's days_from_civil.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = static_cast<int>(static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2));
}

[[noreturn]] void bad_time(const std::string& text) {
  throw Error(ErrorCode::kMalformedInput, "invalid ISO-8601 timestamp: '" + text + "'");
}

int digits(const std::string& s, std::size_t pos, std::size_t n, const std::string& text) {
  if (pos + n > s.size()) bad_time(text);
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') bad_time(text);
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> out;
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

bool nonzero(std::span<const float> v) {
  return std::any_of(v.begin(), v.end(), [](float x) { return x != 0.0f; });
}

}  // namespace

Timestamp parse_iso8601(const std::string& text) {
  const std::string& s = text;
  if (s.size() < 20) bad_time(text);
  const int y = digits(s, 0, 4, text);
  if (s[4] != '-') bad_time(text);
  const int mo = digits(s, 5, 2, text);
  if (s[7] != '-') bad_time(text);
  const int d = digits(s, 8, 2, text);
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') bad_time(text);
  const int h = digits(s, 11, 2, text);
  if (s[13] != ':') bad_time(text);
  const int mi = digits(s, 14, 2, text);
  if (s[16] != ':') bad_time(text);
  const int se = digits(s, 17, 2, text);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60) bad_time(text);

  std::size_t pos = 19;
  int ms = 0;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    int scale = 100;
    const std::size_t start = pos;
    while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
      ms += (s[pos] - '0') * scale;
      scale /= 10;
      ++pos;
    }
    if (pos == start) bad_time(text);
  }
  std::int64_t offset_min = 0;
  if (pos >= s.size()) bad_time(text);
  if (s[pos] == 'Z' || s[pos] == 'z') {
    ++pos;
  } else if (s[pos] == '+' || s[pos] == '-') {
    const int sign = s[pos] == '-' ? -1 : 1;
    const int oh = digits(s, pos + 1, 2, text);
    if (pos + 3 >= s.size() || s[pos + 3] != ':') bad_time(text);
    const int om = digits(s, pos + 4, 2, text);
    offset_min = sign * (oh * 60 + om);
    pos += 6;
  } else {
    bad_time(text);
  }
  if (pos != s.size()) bad_time(text);

  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  const std::int64_t secs = days * 86400 + h * 3600 + mi * 60 + se - offset_min * 60;
  return secs * 1000 + ms;
}

std::string format_iso8601(Timestamp ts) {
  std::int64_t secs = ts >= 0 ? ts / 1000 : -((-ts + 999) / 1000);
  const int ms = static_cast<int>(ts - secs * 1000);
  std::int64_t days = secs >= 0 ? secs / 86400 : -((-secs + 86399) / 86400);
  std::int64_t rem = secs - days * 86400;
  int y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>(rem / 60 % 60),
                static_cast<int>(rem % 60), ms);
  return buf;
}

Timestamp now_timestamp() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string_view verdict_name(Verdict v) {
  return v == Verdict::kCausal ? "causal" : "non_causal";
}

Verdict parse_verdict(std::string_view name) {
  if (name == "causal") return Verdict::kCausal;
  if (name == "non_causal" || name == "non-causal") return Verdict::kNonCausal;
  throw Error(ErrorCode::kMalformedInput,
              "verdict must be 'causal' or 'non_causal', got '" + std::string(name) + "'");
}

json to_json(const FeedbackVerdict& v) {
  json j = {{"quad_id", v.quad_id},
            {"verdict", verdict_name(v.verdict)},
            {"expert_id", v.expert_id},
            {"timestamp", format_iso8601(v.timestamp)}};
  if (v.note) j["note"] = *v.note;
  if (v.confidence_override) j["confidence_override"] = *v.confidence_override;
  return j;
}

FeedbackVerdict verdict_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kMalformedInput, "verdict must be a JSON object");
  auto str = [&](const char* key) -> std::string {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty())
      throw Error(ErrorCode::kMalformedInput, std::string("verdict needs a non-empty string '") +
                                                  key + "'");
    return it->get<std::string>();
  };
  FeedbackVerdict v;
  v.quad_id = str("quad_id");
  v.verdict = parse_verdict(str("verdict"));
  v.expert_id = str("expert_id");
  v.timestamp = parse_iso8601(str("timestamp"));
  if (auto it = j.find("note"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::kMalformedInput, "'note' must be a string");
    v.note = it->get<std::string>();
  }
  if (auto it = j.find("confidence_override"); it != j.end() && !it->is_null()) {
    if (!it->is_number())
      throw Error(ErrorCode::kMalformedInput, "'confidence_override' must be a number");
    const double c = it->get<double>();
    if (!(c >= 0.0 && c <= 1.0))
      throw Error(ErrorCode::kMalformedInput, "'confidence_override' must lie in [0, 1]");
    v.confidence_override = c;
  }
  return v;
}

VerdictLog::VerdictLog(std::string path) : path_(std::move(path)) {
  if (!fs::exists(path_)) return;
  for (const json& j : read_jsonl(path_)) entries_.push_back(verdict_from_json(j));
}

void VerdictLog::append(const FeedbackVerdict& verdict) {
  const std::string line = to_json(verdict).dump() + "\n";
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot append to " + path_);
  out << line;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path_);
  entries_.push_back(verdict);
}

std::vector<FeedbackVerdict> VerdictLog::all() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_;
}

std::size_t VerdictLog::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

std::vector<FeedbackVerdict> VerdictLog::latest() const {
  std::map<std::pair<std::string, std::string>, FeedbackVerdict> best;
  for (const FeedbackVerdict& v : all()) {
    auto key = std::make_pair(v.quad_id, v.expert_id);
    auto it = best.find(key);
    if (it == best.end())
      best.emplace(key, v);
    else if (v.timestamp >= it->second.timestamp)
      it->second = v;
  }
  std::vector<FeedbackVerdict> out;
  out.reserve(best.size());
  for (auto& [key, v] : best) out.push_back(std::move(v));
  return out;
}

std::map<std::string, FeedbackVerdict> VerdictLog::effective() const {
  std::map<std::string, FeedbackVerdict> out;
  // latest() is ordered by (quad, expert), so a later expert wins timestamp ties.
  for (FeedbackVerdict& v : latest()) {
    auto it = out.find(v.quad_id);
    if (it == out.end())
      out.emplace(v.quad_id, std::move(v));
    else if (v.timestamp >= it->second.timestamp)
      it->second = std::move(v);
  }
  return out;
}

void submit_verdict(const FeedbackVerdict& verdict, const std::set<std::string>& known_quad_ids,
                    VerdictLog& log) {
  if (!known_quad_ids.count(verdict.quad_id))
    throw Error(ErrorCode::kNotFound, "unknown quad_id '" + verdict.quad_id + "'");
  log.append(verdict);
}

bool Blocklist::add(BlocklistEntry entry) {
  if (!phrases_.insert(entry.phrase).second) return false;
  entries_.push_back(std::move(entry));
  return true;
}

EmbeddingMatrix Blocklist::probes(const std::string& model_id, std::size_t dimension) const {
  EmbeddingMatrix m(0, dimension);
  for (const BlocklistEntry& e : entries_) {
    auto it = e.embeddings.find(model_id);
    if (it == e.embeddings.end()) continue;
    if (it->second.size() != dimension)
      throw Error(ErrorCode::kDimensionMismatch,
                  "blocklist vector for '" + e.phrase + "' under model '" + model_id +
                      "' has dimension " + std::to_string(it->second.size()) + ", expected " +
                      std::to_string(dimension));
    m.append(it->second);
  }
  return m;
}

void Blocklist::save(const std::string& dir) const {
  const fs::path root(dir);
  fs::create_directories(root / "blocklist");
  std::map<std::string, std::string> per_model;
  std::map<std::string, std::size_t> rows;
  std::string index;
  for (const BlocklistEntry& e : entries_) {
    json refs = json::object();
    for (const auto& [model, vec] : e.embeddings) {
      validate_model_id(model);
      json line = {{"phrase", e.phrase}, {"vector", vec}};
      per_model[model] += line.dump() + "\n";
      refs[model] = {{"file", "blocklist/" + model + ".jsonl"}, {"row", rows[model]++}};
    }
    json j = {{"phrase", e.phrase},
              {"quad_id", e.quad_id},
              {"added_at", format_iso8601(e.added_at)},
              {"embeddings", refs}};
    index += j.dump() + "\n";
  }
  for (const auto& [model, content] : per_model)
    write_file_atomic(root / "blocklist" / (model + ".jsonl"), content);
  write_file_atomic(root / "blocklist.jsonl", index);
}

Blocklist Blocklist::load(const std::string& dir) {
  const fs::path root(dir);
  Blocklist out;
  if (!fs::exists(root / "blocklist.jsonl")) return out;
  std::map<std::string, std::vector<json>> files;
  for (const json& j : read_jsonl(root / "blocklist.jsonl")) {
    try {
      BlocklistEntry e;
      e.phrase = j.at("phrase").get<std::string>();
      e.quad_id = j.value("quad_id", "");
      e.added_at = parse_iso8601(j.at("added_at").get<std::string>());
      for (const auto& [model, ref] : j.at("embeddings").items()) {
        validate_model_id(model);
        const std::string file = ref.at("file").get<std::string>();
        if (file != "blocklist/" + model + ".jsonl")
          throw Error(ErrorCode::kMalformedInput, "unexpected blocklist vector file '" + file + "'");
        auto it = files.find(model);
        if (it == files.end()) it = files.emplace(model, read_jsonl(root / file)).first;
        const std::size_t row = ref.at("row").get<std::size_t>();
        if (row >= it->second.size())
          throw Error(ErrorCode::kMalformedInput, "blocklist row out of range in " + file);
        const json& v = it->second[row];
        if (v.at("phrase").get<std::string>() != e.phrase)
          throw Error(ErrorCode::kMalformedInput,
                      "blocklist vector row " + std::to_string(row) + " in " + file +
                          " does not belong to '" + e.phrase + "'");
        e.embeddings[model] = v.at("vector").get<std::vector<float>>();
      }
      out.add(std::move(e));
    } catch (const json::exception& ex) {
      throw Error(ErrorCode::kMalformedInput, std::string("bad blocklist entry: ") + ex.what());
    }
  }
  return out;
}

std::vector<bool> blocklist_mask(const EmbeddingsByModel& embeddings, const Blocklist& blocklist,
                                 double threshold) {
  std::size_t rows = 0;
  bool first = true;
  for (const auto& [model, m] : embeddings) {
    if (!first && m.rows() != rows)
      throw Error(ErrorCode::kInvalidArgument, "embedding row counts differ across models");
    rows = m.rows();
    first = false;
  }
  std::vector<bool> mask(rows, false);
  if (blocklist.size() == 0) return mask;
  for (const auto& [model, m] : embeddings) {
    const EmbeddingMatrix probes = blocklist.probes(model, m.dimension());
    std::vector<bool> probe_ok(probes.rows());
    for (std::size_t p = 0; p < probes.rows(); ++p) probe_ok[p] = nonzero(probes.row(p));
    for (std::size_t r = 0; r < rows; ++r) {
      if (mask[r] || !nonzero(m.row(r))) continue;  // zero vectors never match
      for (std::size_t p = 0; p < probes.rows(); ++p) {
        if (probe_ok[p] && cosine_similarity(m.row(r), probes.row(p)) >= threshold) {
          mask[r] = true;
          break;
        }
      }
    }
  }
  return mask;
}

std::vector<CausalQuad> blocklist_filter(const std::vector<CausalQuad>& predictions,
                                         const EmbeddingsByModel& embeddings,
                                         const Blocklist& blocklist, double threshold) {
  const std::vector<bool> mask = blocklist_mask(embeddings, blocklist, threshold);
  if (!embeddings.empty() && mask.size() != predictions.size())
    throw Error(ErrorCode::kInvalidArgument, "embeddings do not align with predictions");
  std::vector<CausalQuad> out;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (mask.empty() || !mask[i]) out.push_back(predictions[i]);
  return out;
}

json to_json(const EvolutionReport& r) {
  return {{"appended", r.appended},
          {"blocklisted", r.blocklisted},
          {"removed_per_model", r.removed_per_model}};
}

EvolutionReport apply_feedback(const std::vector<FeedbackVerdict>& verdicts,
                               const std::map<std::string, CausalQuad>& quads_by_id,
                               StoreMap& stores, Blocklist& blocklist,
                               const ProviderMap& providers,
                               const std::vector<std::string>& model_ids, double threshold) {
  std::vector<std::string> causal_ids, causal_phrases, block_ids, block_phrases;
  std::set<std::string> seen;
  for (const FeedbackVerdict& v : verdicts) {
    if (!seen.insert(v.quad_id).second)
      throw Error(ErrorCode::kInvalidArgument, "duplicate verdict for quad '" + v.quad_id + "'");
    auto it = quads_by_id.find(v.quad_id);
    if (it == quads_by_id.end())
      throw Error(ErrorCode::kNotFound, "unknown quad_id '" + v.quad_id + "'");
    const std::string phrase = it->second.phrase();
    if (v.verdict == Verdict::kCausal) {
      causal_ids.push_back(v.quad_id);
      causal_phrases.push_back(phrase);
    } else if (!blocklist.contains(phrase) &&
               std::find(block_phrases.begin(), block_phrases.end(), phrase) ==
                   block_phrases.end()) {
      block_ids.push_back(v.quad_id);
      block_phrases.push_back(phrase);
    }
  }
  for (const std::string& m : model_ids) {
    auto s = stores.find(m);
    if (s == stores.end())
      throw Error(ErrorCode::kPreconditionFailed, "no vector store for model '" + m + "'");
    auto p = providers.find(m);
    if (p != providers.end() && p->second && p->second->dimension() != s->second.dimension())
      throw Error(ErrorCode::kDimensionMismatch,
                  "provider '" + m + "' dimension " + std::to_string(p->second->dimension()) +
                      " does not match its store (" + std::to_string(s->second.dimension()) + ")");
  }

  // Everything that can fail happens before the first mutation.
  const EmbeddingsByModel causal_emb = embed_for_panel(causal_phrases, providers, model_ids);
  const EmbeddingsByModel block_emb = embed_for_panel(block_phrases, providers, model_ids);

  EvolutionReport report;
  const Timestamp now = now_timestamp();
  for (std::size_t i = 0; i < block_phrases.size(); ++i) {
    BlocklistEntry e;
    e.phrase = block_phrases[i];
    e.quad_id = block_ids[i];
    e.added_at = now;
    for (const std::string& m : model_ids) {
      auto row = block_emb.at(m).row(i);
      e.embeddings[m].assign(row.begin(), row.end());
    }
    if (blocklist.add(std::move(e))) ++report.blocklisted;
  }
  for (const std::string& m : model_ids) {
    VectorStore& store = stores.at(m);
    report.removed_per_model[m] =
        block_phrases.empty() ? 0 : store.remove_similar(block_emb.at(m), threshold);
    const EmbeddingMatrix& rows = causal_emb.at(m);
    for (std::size_t i = 0; i < rows.rows(); ++i) store.append(rows.row(i), causal_ids[i]);
  }
  report.appended = causal_ids.size();
  return report;
}

}  // namespace causalmine

#include "causalmine/vector_store.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <future>
#include <thread>

#include "causalmine/error.h"
#include "json.hpp"

namespace causalmine {

namespace {

constexpr char kMagic[8] = {'C', 'M', 'V', 'S', '0', '0', '0', '1'};
constexpr const char* kFormat = "causalmine-vs-1";

// Below this many slots a scan runs on the calling thread.
constexpr std::size_t kParallelThreshold = 1 << 16;

double norm2(std::span<const float> v) {
  double n = 0.0;
  for (float x : v) n += static_cast<double>(x) * x;
  return n;
}

// Same arithmetic as cosine_similarity so store results match a direct
// cosine computation bit for bit.
double cosine_from(double dot, double nq2, double ns2) {
  double denom = nq2 * ns2;
  double c = std::isfinite(denom) ? dot / std::sqrt(denom)
                                  : (dot / std::sqrt(nq2)) / std::sqrt(ns2);
  return std::clamp(c, -1.0, 1.0);
}

bool better(const SearchHit& a, const SearchHit& b) {
  return a.score != b.score ? a.score > b.score : a.slot < b.slot;
}

template <typename Fn>
void for_each_bin(std::size_t bins, std::size_t total_slots, Fn&& fn) {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (bins <= 1 || hw == 1 || total_slots < kParallelThreshold) {
    for (std::size_t b = 0; b < bins; ++b) fn(b);
    return;
  }
  std::size_t workers = std::min<std::size_t>(hw, bins);
  std::vector<std::future<void>> futures;
  for (std::size_t w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t b = w; b < bins; b += workers) fn(b);
    }));
  }
  for (auto& f : futures) f.get();
}

std::string vs_path(const std::string& dir, const std::string& id) {
  return (std::filesystem::path(dir) / (id + ".vs")).string();
}

}  // namespace

void validate_model_id(const std::string& id) {
  if (id.empty() || id.size() > 128) {
    throw Error(ErrorCode::kInvalidArgument, "model id must be 1..128 characters");
  }
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) {
      throw Error(ErrorCode::kInvalidArgument, "model id '" + id + "' has characters outside [A-Za-z0-9._-]");
    }
  }
}

VectorStore::VectorStore(std::string model_id, std::size_t dimension, std::size_t bin_size)
    : model_id_(std::move(model_id)), dimension_(dimension), bin_size_(bin_size) {
  validate_model_id(model_id_);
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
  if (bin_size_ == 0) throw Error(ErrorCode::kInvalidArgument, "bin_size must be positive");
}

VectorStore VectorStore::build(std::string model_id, const EmbeddingMatrix& embeddings,
                               const std::vector<std::string>& quad_ids, std::size_t bin_size) {
  if (embeddings.rows() != quad_ids.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                std::to_string(embeddings.rows()) + " embeddings for " +
                    std::to_string(quad_ids.size()) + " quad ids");
  }
  std::size_t dim = embeddings.dimension();
  if (embeddings.rows() == 0 && dim == 0) dim = 1;
  VectorStore store(std::move(model_id), dim, bin_size);
  std::size_t bins = (quad_ids.size() + bin_size - 1) / bin_size;
  store.bins_.reserve(bins);
  store.ids_.reserve(quad_ids.size());
  for (std::size_t r = 0; r < embeddings.rows(); ++r) store.append(embeddings.row(r), quad_ids[r]);
  return store;
}

void VectorStore::check_dimension(std::size_t n, const char* what) const {
  if (n != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + " of dimension " + std::to_string(n) + " for store '" +
                    model_id_ + "' of dimension " + std::to_string(dimension_));
  }
}

bool VectorStore::is_active(std::size_t slot) const {
  if (slot >= used()) return false;
  return bins_[slot / bin_size_].active[slot % bin_size_] != 0;
}

std::span<const float> VectorStore::vector(std::size_t slot) const {
  if (slot >= capacity()) throw Error(ErrorCode::kNotFound, "slot out of range");
  const Bin& bin = bins_[slot / bin_size_];
  return {bin.data.data() + (slot % bin_size_) * dimension_, dimension_};
}

void VectorStore::append(std::span<const float> v, std::string quad_id) {
  check_dimension(v.size(), "appended vector");
  std::size_t slot = ids_.size();
  if (slot == capacity()) {
    Bin bin;
    bin.data.assign(bin_size_ * dimension_, 0.0f);
    bin.norms2.assign(bin_size_, 0.0);
    bin.active.assign(bin_size_, 0);
    bins_.push_back(std::move(bin));
  }
  Bin& bin = bins_[slot / bin_size_];
  std::size_t off = slot % bin_size_;
  std::copy(v.begin(), v.end(), bin.data.begin() + static_cast<std::ptrdiff_t>(off * dimension_));
  bin.norms2[off] = norm2(v);
  bin.active[off] = 1;
  ids_.push_back(std::move(quad_id));
  ++count_active_;
}

double VectorStore::score(std::size_t slot, std::span<const float> query, double nq2) const {
  const Bin& bin = bins_[slot / bin_size_];
  std::size_t off = slot % bin_size_;
  const float* row = bin.data.data() + off * dimension_;
  double dot = 0.0;
  for (std::size_t i = 0; i < dimension_; ++i) dot += static_cast<double>(query[i]) * row[i];
  return cosine_from(dot, nq2, bin.norms2[off]);
}

std::optional<SearchHit> VectorStore::best_match(std::span<const float> query) const {
  check_dimension(query.size(), "query");
  double nq2 = norm2(query);
  if (nq2 == 0.0) throw Error(ErrorCode::kUndefinedSimilarity, "zero-norm query vector");
  std::vector<std::optional<SearchHit>> per_bin(bins_.size());
  for_each_bin(bins_.size(), used(), [&](std::size_t b) {
    const Bin& bin = bins_[b];
    std::size_t begin = b * bin_size_;
    std::size_t end = std::min(used(), begin + bin_size_);
    std::optional<SearchHit> best;
    for (std::size_t slot = begin; slot < end; ++slot) {
      std::size_t off = slot - begin;
      if (!bin.active[off] || bin.norms2[off] == 0.0) continue;
      double s = score(slot, query, nq2);
      if (!best || s > best->score) best = SearchHit{"", s, slot};
    }
    per_bin[b] = best;
  });
  std::optional<SearchHit> best;
  for (auto& h : per_bin) {
    if (h && (!best || better(*h, *best))) best = h;
  }
  if (best) best->quad_id = ids_[best->slot];
  return best;
}

std::optional<SearchHit> VectorStore::max_similarity(std::span<const float> query,
                                                     double threshold) const {
  auto hit = best_match(query);
  if (hit && hit->score >= threshold) return hit;
  return std::nullopt;
}

std::vector<std::size_t> VectorStore::find_similar(const EmbeddingMatrix& probes,
                                                   double threshold) const {
  std::vector<std::size_t> out;
  if (probes.rows() == 0) return out;
  check_dimension(probes.dimension(), "probe");
  std::vector<double> pn2(probes.rows());
  for (std::size_t p = 0; p < probes.rows(); ++p) pn2[p] = norm2(probes.row(p));
  std::vector<std::vector<std::size_t>> per_bin(bins_.size());
  for_each_bin(bins_.size(), used(), [&](std::size_t b) {
    const Bin& bin = bins_[b];
    std::size_t begin = b * bin_size_;
    std::size_t end = std::min(used(), begin + bin_size_);
    for (std::size_t slot = begin; slot < end; ++slot) {
      std::size_t off = slot - begin;
      if (!bin.active[off] || bin.norms2[off] == 0.0) continue;
      for (std::size_t p = 0; p < probes.rows(); ++p) {
        if (pn2[p] == 0.0) continue;
        if (score(slot, probes.row(p), pn2[p]) >= threshold) {
          per_bin[b].push_back(slot);
          break;
        }
      }
    }
  });
  for (auto& v : per_bin) out.insert(out.end(), v.begin(), v.end());
  return out;
}

std::size_t VectorStore::remove_similar(const EmbeddingMatrix& probes, double threshold) {
  auto slots = find_similar(probes, threshold);
  for (std::size_t slot : slots) deactivate(slot);
  return slots.size();
}

void VectorStore::deactivate(std::size_t slot) {
  if (!is_active(slot)) return;
  bins_[slot / bin_size_].active[slot % bin_size_] = 0;
  --count_active_;
}

void VectorStore::save(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  std::string path = vs_path(dir, model_id_);
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp);
    auto put = [&](const void* p, std::size_t n) {
      out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    std::uint32_t dim = static_cast<std::uint32_t>(dimension_);
    std::uint32_t bs = static_cast<std::uint32_t>(bin_size_);
    std::uint64_t cap = capacity(), used_slots = used();
    put(kMagic, sizeof(kMagic));
    put(&dim, sizeof(dim));
    put(&bs, sizeof(bs));
    put(&cap, sizeof(cap));
    put(&used_slots, sizeof(used_slots));
    for (const auto& bin : bins_) put(bin.active.data(), bin.active.size());
    for (const auto& bin : bins_) put(bin.data.data(), bin.data.size() * sizeof(float));
    for (const auto& id : ids_) {
      std::uint32_t len = static_cast<std::uint32_t>(id.size());
      put(&len, sizeof(len));
      put(id.data(), id.size());
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);

  nlohmann::json header = {{"format", kFormat},
                           {"model_id", model_id_},
                           {"dimension", dimension_},
                           {"bin_size", bin_size_},
                           {"count_active", count_active_},
                           {"used", used()},
                           {"capacity", capacity()}};
  std::ofstream h(path + ".json", std::ios::trunc);
  if (!h) throw Error(ErrorCode::kIo, "cannot write " + path + ".json");
  h << header.dump(2) << "\n";
}

bool VectorStore::exists(const std::string& dir, const std::string& model_id) {
  std::string p = vs_path(dir, model_id);
  return std::filesystem::exists(p) && std::filesystem::exists(p + ".json");
}

VectorStore VectorStore::load(const std::string& dir, const std::string& model_id) {
  validate_model_id(model_id);
  std::string path = vs_path(dir, model_id);
  std::ifstream h(path + ".json");
  if (!h) throw Error(ErrorCode::kNotFound, "no store header " + path + ".json");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(h);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedInput, path + ".json: " + e.what());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "no store file " + path);
  auto get = [&](void* p, std::size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in) throw Error(ErrorCode::kMalformedInput, path + ": truncated");
  };
  char magic[8];
  get(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kMalformedInput, path + ": bad magic");
  }
  std::uint32_t dim = 0, bs = 0;
  std::uint64_t cap = 0, used_slots = 0;
  get(&dim, sizeof(dim));
  get(&bs, sizeof(bs));
  get(&cap, sizeof(cap));
  get(&used_slots, sizeof(used_slots));
  const bool empty = cap == 0 && used_slots == 0;
  const bool filled = used_slots > 0 && used_slots <= cap && cap - used_slots < bs;
  if (bs == 0 || cap % bs != 0 || !(empty || filled)) {
    throw Error(ErrorCode::kMalformedInput, path + ": inconsistent layout");
  }
  if (header.value("model_id", "") != model_id || header.value("dimension", 0u) != dim ||
      header.value("bin_size", 0u) != bs || header.value("capacity", std::uint64_t{0}) != cap ||
      header.value("used", std::uint64_t{0}) != used_slots) {
    throw Error(ErrorCode::kMalformedInput, path + ": header does not match binary");
  }
  VectorStore store(model_id, dim, bs);
  std::size_t nbins = static_cast<std::size_t>(cap / bs);
  store.bins_.resize(nbins);
  for (auto& bin : store.bins_) {
    bin.active.resize(bs);
    get(bin.active.data(), bs);
  }
  for (auto& bin : store.bins_) {
    bin.data.resize(static_cast<std::size_t>(bs) * dim);
    get(bin.data.data(), bin.data.size() * sizeof(float));
    bin.norms2.resize(bs);
    for (std::size_t off = 0; off < bs; ++off) {
      bin.norms2[off] = norm2({bin.data.data() + off * dim, dim});
    }
  }
  store.ids_.reserve(used_slots);
  for (std::uint64_t i = 0; i < used_slots; ++i) {
    std::uint32_t len = 0;
    get(&len, sizeof(len));
    std::string id(len, '\0');
    if (len > 0) get(id.data(), len);
    store.ids_.push_back(std::move(id));
  }
  std::size_t active = 0;
  for (std::size_t slot = 0; slot < nbins * bs; ++slot) {
    bool a = store.bins_[slot / bs].active[slot % bs] != 0;
    if (a && slot >= used_slots) {
      throw Error(ErrorCode::kMalformedInput, path + ": active padding slot");
    }
    active += a ? 1 : 0;
  }
  store.count_active_ = active;
  if (header.value("count_active", std::uint64_t{0}) != active) {
    throw Error(ErrorCode::kMalformedInput, path + ": count_active mismatch");
  }
  return store;
}

}  // namespace causalmine

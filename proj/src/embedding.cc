#include "causalmine/embedding.h"

#include <cstdint>
#include <fstream>

#include "causalmine/error.h"
#include "causalmine/text.h"

namespace causalmine {

namespace {

std::uint64_t fnv1a(std::string_view a, std::string_view b) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : a) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= 0x1f;
  h *= 1099511628211ULL;
  for (unsigned char c : b) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

void EmbeddingMatrix::append(std::span<const float> v) {
  if (rows_ == 0 && dimension_ == 0) dimension_ = v.size();
  if (v.size() != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding row of length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(dimension_));
  }
  data_.insert(data_.end(), v.begin(), v.end());
  ++rows_;
}

std::string_view provider_kind_name(ProviderKind kind) {
  switch (kind) {
    case ProviderKind::kPrecomputedFile: return "precomputed_file";
    case ProviderKind::kHttpService: return "http_service";
    case ProviderKind::kWordVectorAverage: return "word_vector_average";
    case ProviderKind::kHashed: return "hashed";
  }
  return "unknown";
}

std::vector<std::string> split_words(std::string_view phrase) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < phrase.size()) {
    while (i < phrase.size() && phrase[i] == ' ') ++i;
    std::size_t j = i;
    while (j < phrase.size() && phrase[j] != ' ') ++j;
    if (j > i) out.emplace_back(phrase.substr(i, j - i));
    i = j;
  }
  return out;
}

EmbeddingMatrix embed_phrases(const EmbeddingProvider& provider,
                              std::span<const std::string> phrases) {
  for (const auto& p : phrases) {
    if (p.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot embed an empty phrase");
  }
  if (phrases.empty()) return EmbeddingMatrix(0, provider.dimension());
  EmbeddingMatrix m = provider.embed(phrases);
  if (m.rows() != phrases.size() || (m.rows() > 0 && m.dimension() != provider.dimension())) {
    throw Error(ErrorCode::kDimensionMismatch,
                "provider " + provider.provider_id() + " returned a " +
                    std::to_string(m.rows()) + "x" + std::to_string(m.dimension()) +
                    " matrix for " + std::to_string(phrases.size()) + " phrases of dimension " +
                    std::to_string(provider.dimension()));
  }
  return m;
}

PrecomputedFileProvider::PrecomputedFileProvider(std::string provider_id, std::size_t dimension)
    : id_(std::move(provider_id)), dimension_(dimension), vectors_(0, dimension) {}

std::unique_ptr<PrecomputedFileProvider> PrecomputedFileProvider::load(const std::string& path,
                                                                       std::string provider_id) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open embedding file: " + path);
  std::unique_ptr<PrecomputedFileProvider> p;
  std::string line;
  std::size_t lineno = 0;
  std::vector<float> v;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      v = j.at("vector").get<std::vector<float>>();
      if (!p) p = std::make_unique<PrecomputedFileProvider>(provider_id, v.size());
      p->add(j.at("phrase").get<std::string>(), v);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kMalformedInput,
                  path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!p) throw Error(ErrorCode::kMalformedInput, path + ": no embeddings");
  return p;
}

void PrecomputedFileProvider::add(const std::string& phrase, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch,
                id_ + ": vector for '" + phrase + "' has length " + std::to_string(vector.size()));
  }
  if (index_.count(phrase) != 0) return;
  index_.emplace(phrase, vectors_.rows());
  vectors_.append(vector);
}

EmbeddingMatrix PrecomputedFileProvider::embed(std::span<const std::string> phrases) const {
  EmbeddingMatrix out(0, dimension_);
  for (const auto& p : phrases) {
    auto it = index_.find(p);
    if (it == index_.end()) {
      throw Error(ErrorCode::kUnknownPhrase, id_ + ": no stored embedding for '" + p + "'");
    }
    out.append(vectors_.row(it->second));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string provider_id, std::string model,
                                             HttpClientOptions options, std::size_t batch_size)
    : id_(std::move(provider_id)),
      model_(std::move(model)),
      client_(std::move(options)),
      batch_size_(batch_size == 0 ? 1 : batch_size) {
  nlohmann::json info = client_.get("/info");
  if (!info.contains("dimension") || !info["dimension"].is_number_unsigned() ||
      info["dimension"].get<std::size_t>() == 0) {
    throw Error(ErrorCode::kProviderUnavailable, id_ + ": /info lacks a positive dimension");
  }
  dimension_ = info["dimension"].get<std::size_t>();
}

EmbeddingMatrix HttpEmbeddingProvider::embed(std::span<const std::string> phrases) const {
  EmbeddingMatrix out(0, dimension_);
  for (std::size_t b = 0; b < phrases.size(); b += batch_size_) {
    std::size_t e = std::min(phrases.size(), b + batch_size_);
    nlohmann::json body;
    body["model"] = model_;
    body["texts"] = nlohmann::json::array();
    for (std::size_t i = b; i < e; ++i) body["texts"].push_back(phrases[i]);
    nlohmann::json reply = client_.post("/embed", body);
    if (!reply.contains("vectors") || !reply["vectors"].is_array() ||
        reply["vectors"].size() != e - b) {
      throw Error(ErrorCode::kProviderUnavailable,
                  id_ + ": /embed returned the wrong number of vectors");
    }
    for (const auto& v : reply["vectors"]) {
      auto row = v.get<std::vector<float>>();
      if (row.size() != dimension_) {
        throw Error(ErrorCode::kDimensionMismatch,
                    id_ + ": service returned a vector of length " + std::to_string(row.size()));
      }
      out.append(row);
    }
  }
  return out;
}

EmbeddingMatrix WordVectorAverageProvider::embed(std::span<const std::string> phrases) const {
  const std::size_t dim = model_->dimension();
  EmbeddingMatrix out(0, dim);
  std::vector<double> acc(dim);
  std::vector<float> row(dim);
  for (const auto& p : phrases) {
    std::fill(acc.begin(), acc.end(), 0.0);
    std::size_t known = 0;
    for (const auto& w : split_words(p)) {
      auto v = model_->vector(to_lower(w));
      if (!v) continue;
      for (std::size_t i = 0; i < dim; ++i) acc[i] += (*v)[i];
      ++known;
    }
    if (known == 0) {
      throw Error(ErrorCode::kAllTokensUnknown,
                  id_ + ": no token of '" + p + "' is in the vocabulary");
    }
    for (std::size_t i = 0; i < dim; ++i) row[i] = static_cast<float>(acc[i] / known);
    out.append(row);
  }
  return out;
}

HashedEmbeddingProvider::HashedEmbeddingProvider(std::string provider_id, std::size_t dimension,
                                                 std::string seed)
    : id_(std::move(provider_id)), dimension_(dimension), seed_(std::move(seed)) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
}

EmbeddingMatrix HashedEmbeddingProvider::embed(std::span<const std::string> phrases) const {
  EmbeddingMatrix out(0, dimension_);
  std::vector<double> acc(dimension_);
  std::vector<float> row(dimension_);
  for (const auto& p : phrases) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (const auto& w : split_words(p)) {
      std::uint64_t state = fnv1a(seed_, to_lower(w));
      for (std::size_t i = 0; i < dimension_; ++i) {
        // Uniform in [-1, 1).
        acc[i] += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
      }
    }
    for (std::size_t i = 0; i < dimension_; ++i) row[i] = static_cast<float>(acc[i]);
    out.append(row);
  }
  return out;
}

}  // namespace causalmine

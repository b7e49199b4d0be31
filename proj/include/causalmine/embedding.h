#ifndef CAUSALMINE_EMBEDDING_H_
#define CAUSALMINE_EMBEDDING_H_

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "causalmine/http_client.h"
#include "causalmine/vectors.h"

namespace causalmine {

// Row-major float matrix, one row per phrase.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(std::size_t rows, std::size_t dimension)
      : rows_(rows), dimension_(dimension), data_(rows * dimension, 0.0f) {}

  std::size_t rows() const { return rows_; }
  std::size_t dimension() const { return dimension_; }

  std::span<float> row(std::size_t r) { return {data_.data() + r * dimension_, dimension_}; }
  std::span<const float> row(std::size_t r) const {
    return {data_.data() + r * dimension_, dimension_};
  }

  void append(std::span<const float> v);

 private:
  std::size_t rows_ = 0;
  std::size_t dimension_ = 0;
  std::vector<float> data_;
};

enum class ProviderKind { kPrecomputedFile, kHttpService, kWordVectorAverage, kHashed };

std::string_view provider_kind_name(ProviderKind kind);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const std::string& provider_id() const = 0;
  virtual ProviderKind kind() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual EmbeddingMatrix embed(std::span<const std::string> phrases) const = 0;
};

// Validates inputs and output shape around provider.embed().
EmbeddingMatrix embed_phrases(const EmbeddingProvider& provider,
                              std::span<const std::string> phrases);

// JSONL of {"phrase": ..., "vector": [...]}.
class PrecomputedFileProvider : public EmbeddingProvider {
 public:
  PrecomputedFileProvider(std::string provider_id, std::size_t dimension);
  static std::unique_ptr<PrecomputedFileProvider> load(const std::string& path,
                                                       std::string provider_id);

  void add(const std::string& phrase, std::span<const float> vector);
  bool contains(const std::string& phrase) const { return index_.count(phrase) != 0; }

  const std::string& provider_id() const override { return id_; }
  ProviderKind kind() const override { return ProviderKind::kPrecomputedFile; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingMatrix embed(std::span<const std::string> phrases) const override;

 private:
  std::string id_;
  std::size_t dimension_;
  std::unordered_map<std::string, std::size_t> index_;
  EmbeddingMatrix vectors_;
};

// GET /info -> {dimension}; POST /embed {model, texts} -> {vectors}.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  // Performs the /info handshake.
  HttpEmbeddingProvider(std::string provider_id, std::string model, HttpClientOptions options,
                        std::size_t batch_size = 64);

  const std::string& provider_id() const override { return id_; }
  ProviderKind kind() const override { return ProviderKind::kHttpService; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingMatrix embed(std::span<const std::string> phrases) const override;

 private:
  std::string id_;
  std::string model_;
  HttpJsonClient client_;
  std::size_t batch_size_;
  std::size_t dimension_ = 0;
};

// Mean of the vectors of the phrase's known tokens.
class WordVectorAverageProvider : public EmbeddingProvider {
 public:
  WordVectorAverageProvider(std::string provider_id, std::shared_ptr<const WordVectorModel> model)
      : id_(std::move(provider_id)), model_(std::move(model)) {}

  const std::string& provider_id() const override { return id_; }
  ProviderKind kind() const override { return ProviderKind::kWordVectorAverage; }
  std::size_t dimension() const override { return model_->dimension(); }
  EmbeddingMatrix embed(std::span<const std::string> phrases) const override;

 private:
  std::string id_;
  std::shared_ptr<const WordVectorModel> model_;
};

// Synthetic, deterministic bag-of-tokens embedding: every token maps to a
// pseudo-random vector derived from (seed, token), and a phrase is the sum of
// its token vectors. Phrases sharing most tokens are close; phrases sharing
// none are near-orthogonal at reasonable dimensions. Used for fixtures and
// offline runs.
class HashedEmbeddingProvider : public EmbeddingProvider {
 public:
  HashedEmbeddingProvider(std::string provider_id, std::size_t dimension, std::string seed);

  const std::string& provider_id() const override { return id_; }
  ProviderKind kind() const override { return ProviderKind::kHashed; }
  std::size_t dimension() const override { return dimension_; }
  EmbeddingMatrix embed(std::span<const std::string> phrases) const override;

 private:
  std::string id_;
  std::size_t dimension_;
  std::string seed_;
};

std::vector<std::string> split_words(std::string_view phrase);

}  // namespace causalmine

#endif  // CAUSALMINE_EMBEDDING_H_

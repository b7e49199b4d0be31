#ifndef CAUSALMINE_VECTORS_H_
#define CAUSALMINE_VECTORS_H_

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "causalmine/error.h"

namespace causalmine {

// Sum(u_i v_i) / (|u| |v|), accumulated in double and clamped to [-1, 1].
// Throws kDimensionMismatch on unequal lengths and kUndefinedSimilarity when
// either vector has zero norm.
template <typename T>
double cosine_similarity(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine: lengths " + std::to_string(u.size()) + " and " +
                    std::to_string(v.size()));
  }
  double dot = 0.0, nu = 0.0, nv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = static_cast<double>(u[i]);
    const double b = static_cast<double>(v[i]);
    dot += a * b;
    nu += a * a;
    nv += b * b;
  }
  if (nu == 0.0 || nv == 0.0) {
    throw Error(ErrorCode::kUndefinedSimilarity, "cosine: zero-norm vector");
  }
  double denom = nu * nv;
  double c = std::isfinite(denom) ? dot / std::sqrt(denom) : (dot / std::sqrt(nu)) / std::sqrt(nv);
  if (c > 1.0) return 1.0;
  if (c < -1.0) return -1.0;
  return c;
}

template <typename T>
double cosine_similarity(const std::vector<T>& u, const std::vector<T>& v) {
  return cosine_similarity(std::span<const T>(u), std::span<const T>(v));
}

// Token -> vector map loaded from the common text format:
//
//   <vocab_size> <dimension>
//   token v1 v2 ... vd
//
// Tokens are stored lowercase; on a case collision the first occurrence wins.
class WordVectorModel {
 public:
  WordVectorModel(std::string model_id, std::size_t dimension);

  static WordVectorModel load(const std::string& path, const std::string& model_id);
  static WordVectorModel parse(std::string_view content, const std::string& model_id);

  void add(std::string_view token, std::span<const float> vector);

  const std::string& model_id() const { return model_id_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return tokens_.size(); }
  bool contains(std::string_view token) const;

  // nullopt for out-of-vocabulary tokens (exact lowercase match).
  std::optional<std::span<const float>> vector(std::string_view token) const;

  // Up to top_k vocabulary tokens with similarity >= alpha, best first, ties
  // broken by token order. The query token itself is excluded. Empty when the
  // token is unknown or has zero norm.
  std::vector<std::pair<std::string, double>> most_similar(std::string_view token,
                                                           std::size_t top_k,
                                                           double alpha) const;

 private:
  std::string model_id_;
  std::size_t dimension_;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace causalmine

#endif  // CAUSALMINE_VECTORS_H_

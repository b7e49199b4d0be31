#ifndef CAUSALMINE_VECTOR_STORE_H_
#define CAUSALMINE_VECTOR_STORE_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "causalmine/embedding.h"

namespace causalmine {

inline constexpr std::size_t kDefaultBinSize = 40000;

struct SearchHit {
  std::string quad_id;
  double score = 0.0;
  std::size_t slot = 0;
};

// Per-model store of embedding vectors laid out in fixed-capacity bins.
//
// Slots [0, used) hold appended entries in insertion order; slots
// [used, capacity) are zero padding and are never active. Deletion is soft:
// an entry's active flag is cleared and its slot is kept, so the bin layout
// never changes. Entries with zero norm are kept but can never match.
//
// Not internally synchronized: callers provide the many-readers or
// one-writer discipline.
class VectorStore {
 public:
  VectorStore(std::string model_id, std::size_t dimension,
              std::size_t bin_size = kDefaultBinSize);

  static VectorStore build(std::string model_id, const EmbeddingMatrix& embeddings,
                           const std::vector<std::string>& quad_ids,
                           std::size_t bin_size = kDefaultBinSize);

  const std::string& model_id() const { return model_id_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t bin_size() const { return bin_size_; }
  std::size_t bin_count() const { return bins_.size(); }
  std::size_t capacity() const { return bins_.size() * bin_size_; }
  std::size_t used() const { return ids_.size(); }
  std::size_t count_active() const { return count_active_; }
  std::size_t inactive() const { return used() - count_active_; }
  std::size_t padding() const { return capacity() - used(); }

  bool is_active(std::size_t slot) const;
  const std::string& quad_id(std::size_t slot) const { return ids_.at(slot); }
  std::span<const float> vector(std::size_t slot) const;

  void append(std::span<const float> vector, std::string quad_id);

  // Best active entry regardless of score; ties go to the earliest slot.
  // nullopt when nothing is searchable.
  std::optional<SearchHit> best_match(std::span<const float> query) const;
  // Best active entry if its score >= threshold.
  std::optional<SearchHit> max_similarity(std::span<const float> query, double threshold) const;

  // Active slots whose similarity to any probe is >= threshold.
  std::vector<std::size_t> find_similar(const EmbeddingMatrix& probes, double threshold) const;
  // Deactivates find_similar(); returns how many entries were deactivated.
  std::size_t remove_similar(const EmbeddingMatrix& probes, double threshold = 0.85);
  void deactivate(std::size_t slot);

  // <dir>/<model_id>.vs (binary) plus <dir>/<model_id>.vs.json (header).
  void save(const std::string& dir) const;
  static VectorStore load(const std::string& dir, const std::string& model_id);
  static bool exists(const std::string& dir, const std::string& model_id);

 private:
  struct Bin {
    std::vector<float> data;      // bin_size * dimension
    std::vector<double> norms2;   // squared norms
    std::vector<std::uint8_t> active;
  };

  void check_dimension(std::size_t n, const char* what) const;
  double score(std::size_t slot, std::span<const float> query, double query_norm2) const;

  std::string model_id_;
  std::size_t dimension_;
  std::size_t bin_size_;
  std::vector<Bin> bins_;
  std::vector<std::string> ids_;
  std::size_t count_active_ = 0;
};

void validate_model_id(const std::string& model_id);

}  // namespace causalmine

#endif  // CAUSALMINE_VECTOR_STORE_H_

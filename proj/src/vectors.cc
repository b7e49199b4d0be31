#include "causalmine/vectors.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "causalmine/text.h"

namespace causalmine {

WordVectorModel::WordVectorModel(std::string model_id, std::size_t dimension)
    : model_id_(std::move(model_id)), dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "dimension must be positive");
}

WordVectorModel WordVectorModel::load(const std::string& path, const std::string& model_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open word-vector file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), model_id);
}

WordVectorModel WordVectorModel::parse(std::string_view content, const std::string& model_id) {
  std::istringstream in{std::string(content)};
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kMalformedInput, model_id + ": empty word-vector file");
  }
  std::istringstream header(line);
  long long vocab = -1, dim = -1;
  if (!(header >> vocab >> dim) || vocab < 0 || dim <= 0) {
    throw Error(ErrorCode::kMalformedInput,
                model_id + ": header must be '<vocab_size> <dimension>'");
  }
  WordVectorModel model(model_id, static_cast<std::size_t>(dim));
  std::vector<float> vec(static_cast<std::size_t>(dim));
  std::size_t lineno = 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::size_t k = 0;
    std::string field;
    while (row >> field) {
      if (k >= vec.size()) {
        k = vec.size() + 1;
        break;
      }
      float value = 0.0f;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw Error(ErrorCode::kMalformedInput,
                    model_id + ":" + std::to_string(lineno) + ": bad number '" + field + "'");
      }
      vec[k++] = value;
    }
    if (k != vec.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  model_id + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(dim) + " components for '" + token + "'");
    }
    model.add(token, vec);
    ++rows;
  }
  if (rows != static_cast<std::size_t>(vocab)) {
    throw Error(ErrorCode::kMalformedInput,
                model_id + ": header declares " + std::to_string(vocab) + " rows, found " +
                    std::to_string(rows));
  }
  return model;
}

void WordVectorModel::add(std::string_view token, std::span<const float> v) {
  if (v.size() != dimension_) {
    throw Error(ErrorCode::kDimensionMismatch,
                model_id_ + ": vector for '" + std::string(token) + "' has length " +
                    std::to_string(v.size()));
  }
  std::string key = to_lower(token);
  if (index_.count(key) != 0) return;
  index_.emplace(key, tokens_.size());
  tokens_.push_back(std::move(key));
  double n = 0.0;
  for (float x : v) n += static_cast<double>(x) * x;
  norms_.push_back(std::sqrt(n));
  data_.insert(data_.end(), v.begin(), v.end());
}

bool WordVectorModel::contains(std::string_view token) const {
  return index_.count(std::string(token)) != 0;
}

std::optional<std::span<const float>> WordVectorModel::vector(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>(data_.data() + it->second * dimension_, dimension_);
}

std::vector<std::pair<std::string, double>> WordVectorModel::most_similar(
    std::string_view token, std::size_t top_k, double alpha) const {
  std::vector<std::pair<std::string, double>> hits;
  auto it = index_.find(std::string(token));
  if (it == index_.end() || top_k == 0) return hits;
  const std::size_t q = it->second;
  if (norms_[q] == 0.0) return hits;
  const float* qv = data_.data() + q * dimension_;
  for (std::size_t r = 0; r < tokens_.size(); ++r) {
    if (r == q || norms_[r] == 0.0) continue;
    const float* rv = data_.data() + r * dimension_;
    double dot = 0.0;
    for (std::size_t i = 0; i < dimension_; ++i) dot += static_cast<double>(qv[i]) * rv[i];
    double c = std::clamp(dot / (norms_[q] * norms_[r]), -1.0, 1.0);
    if (c >= alpha) hits.emplace_back(tokens_[r], c);
  }
  auto better = [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  };
  if (hits.size() > top_k) {
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(top_k),
                      hits.end(), better);
    hits.resize(top_k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
  return hits;
}

}  // namespace causalmine

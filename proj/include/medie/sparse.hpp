#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

namespace medie {

// A [outputs x hash_dim] weight matrix stored by column: only columns for
// features that have been touched are materialized, the rest are zero.
// Slots are allocated in first-touch order, which keeps every traversal
// deterministic.
class SparseWeights {
 public:
  SparseWeights() = default;
  explicit SparseWeights(std::size_t outputs) : outputs_(outputs) {}

  std::size_t outputs() const { return outputs_; }
  std::size_t num_columns() const { return features_.size(); }

  const double* find(std::uint32_t feature) const {
    auto it = slot_.find(feature);
    return it == slot_.end() ? nullptr : values_.data() + it->second * outputs_;
  }

  std::size_t ensure(std::uint32_t feature) {
    auto [it, inserted] = slot_.emplace(feature, static_cast<std::uint32_t>(features_.size()));
    if (inserted) {
      features_.push_back(feature);
      values_.resize(values_.size() + outputs_, 0.0);
    }
    return it->second;
  }

  std::span<double> column(std::size_t slot) { return {values_.data() + slot * outputs_, outputs_}; }
  std::span<const double> column(std::size_t slot) const { return {values_.data() + slot * outputs_, outputs_}; }

  double weight(std::uint32_t feature, std::size_t output) const {
    const double* col = find(feature);
    return col ? col[output] : 0.0;
  }

  // out[k] += sum over features of W[k][f].
  void accumulate(std::span<const std::uint32_t> features, std::span<double> out) const {
    for (auto f : features) {
      if (const double* col = find(f)) {
        for (std::size_t k = 0; k < outputs_; ++k) out[k] += col[k];
      }
    }
  }

  std::span<const std::uint32_t> features() const { return features_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double squared_norm() const {
    double s = 0.0;
    for (double v : values_) s += v * v;
    return s;
  }

  // Equality as matrices: absent columns equal zero columns.
  bool same_weights(const SparseWeights& other) const;

 private:
  std::size_t outputs_ = 0;
  std::unordered_map<std::uint32_t, std::uint32_t> slot_;
  std::vector<std::uint32_t> features_;
  std::vector<double> values_;
};

inline bool SparseWeights::same_weights(const SparseWeights& other) const {
  if (outputs_ != other.outputs_) return false;
  auto covered = [](const SparseWeights& a, const SparseWeights& b) {
    for (std::size_t s = 0; s < a.num_columns(); ++s) {
      const double* col = b.find(a.features_[s]);
      for (std::size_t k = 0; k < a.outputs_; ++k) {
        if (a.values_[s * a.outputs_ + k] != (col ? col[k] : 0.0)) return false;
      }
    }
    return true;
  };
  return covered(*this, other) && covered(other, *this);
}

}  // namespace medie

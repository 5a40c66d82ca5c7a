#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace medie {

struct FeatureConfig {
  int window = 2;                     // half-width in characters
  std::uint32_t hash_dim = 1u << 20;  // power of two
  bool unigrams = true;
  bool bigrams = true;
  bool char_classes = true;

  void check() const;  // throws std::invalid_argument
  bool operator==(const FeatureConfig&) const = default;
};

// Hashed feature indices per position; duplicates are kept (a feature that
// fires twice counts twice).
class FeatureSeq {
 public:
  std::size_t length() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::span<const std::uint32_t> at(std::size_t t) const {
    return {ids_.data() + offsets_[t], offsets_[t + 1] - offsets_[t]};
  }

  void push(std::uint32_t id) { ids_.push_back(id); }
  void end_position() { offsets_.push_back(static_cast<std::uint32_t>(ids_.size())); }

  static FeatureSeq from_positions(const std::vector<std::vector<std::uint32_t>>& positions);

 private:
  std::vector<std::uint32_t> ids_;
  std::vector<std::uint32_t> offsets_{0};
};

// Character-window features: a bias feature, character unigrams at offsets
// -w..w, bigrams starting at -w..w-1, and the character class at -1..1.
class FeatureExtractor {
 public:
  explicit FeatureExtractor(FeatureConfig config);

  FeatureSeq extract(std::u32string_view text) const;
  const FeatureConfig& config() const { return config_; }
  std::uint32_t bias_feature() const { return bias_; }

 private:
  std::uint32_t hash(std::span<const std::uint32_t> key) const;

  FeatureConfig config_;
  std::uint32_t bias_;
};

}  // namespace medie

#include "medie/features.hpp"

#include <stdexcept>
#include <string>

#include "medie/random.hpp"
#include "medie/text.hpp"

namespace medie {

namespace {

enum Template : std::uint32_t { kBias = 1, kUnigram = 2, kBigram = 3, kClass = 4 };

constexpr char32_t kBeforeText = 0x02;
constexpr char32_t kAfterText = 0x03;

}  // namespace

void FeatureConfig::check() const {
  if (window < 0) throw std::invalid_argument("feature window must be >= 0");
  if (hash_dim == 0 || (hash_dim & (hash_dim - 1)) != 0) {
    throw std::invalid_argument("hash_dim must be a power of two, got " + std::to_string(hash_dim));
  }
}

FeatureSeq FeatureSeq::from_positions(const std::vector<std::vector<std::uint32_t>>& positions) {
  FeatureSeq seq;
  for (const auto& pos : positions) {
    for (auto id : pos) seq.push(id);
    seq.end_position();
  }
  return seq;
}

FeatureExtractor::FeatureExtractor(FeatureConfig config) : config_(config) {
  config_.check();
  const std::uint32_t key[] = {kBias};
  bias_ = hash(key);
}

std::uint32_t FeatureExtractor::hash(std::span<const std::uint32_t> key) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint32_t k : key) {
    for (int b = 0; b < 4; ++b) {
      h ^= (k >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  }
  return static_cast<std::uint32_t>(splitmix64(h) & (config_.hash_dim - 1));
}

FeatureSeq FeatureExtractor::extract(std::u32string_view text) const {
  const auto n = static_cast<std::int64_t>(text.size());
  auto char_at = [&](std::int64_t i) -> char32_t {
    if (i < 0) return kBeforeText;
    if (i >= n) return kAfterText;
    return text[static_cast<std::size_t>(i)];
  };
  const int w = config_.window;
  const int class_w = w < 1 ? w : 1;
  FeatureSeq seq;
  for (std::int64_t t = 0; t < n; ++t) {
    seq.push(bias_);
    if (config_.unigrams) {
      for (int d = -w; d <= w; ++d) {
        const std::uint32_t key[] = {kUnigram, static_cast<std::uint32_t>(d + 128), char_at(t + d)};
        seq.push(hash(key));
      }
    }
    if (config_.bigrams) {
      for (int d = -w; d < w; ++d) {
        const std::uint32_t key[] = {kBigram, static_cast<std::uint32_t>(d + 128), char_at(t + d), char_at(t + d + 1)};
        seq.push(hash(key));
      }
    }
    if (config_.char_classes) {
      for (int d = -class_w; d <= class_w; ++d) {
        const std::int64_t i = t + d;
        const std::uint32_t cls = (i < 0 || i >= n) ? 0xFFu : static_cast<std::uint32_t>(char_class(char_at(i)));
        const std::uint32_t key[] = {kClass, static_cast<std::uint32_t>(d + 128), cls};
        seq.push(hash(key));
      }
    }
    seq.end_position();
  }
  return seq;
}

}  // namespace medie

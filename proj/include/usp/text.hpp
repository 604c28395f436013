#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace usp::text {

std::string trim(std::string_view s);
std::string lowercase(std::string_view s);

/// Lowercases and collapses every whitespace run to a single space.
std::string normalize_ws(std::string_view s);

/// Lowercased alphanumeric token runs, in order of appearance.
std::vector<std::string> tokenize_words(std::string_view s);

bool is_stopword(const std::string& word);

/// tokenize_words minus stopwords and single-character tokens.
std::vector<std::string> content_words(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);

/// Deterministic RNG stream; identical sequences on every platform.
struct SplitMix64 {
  std::uint64_t state;
  explicit SplitMix64(std::uint64_t seed) : state(seed) {}
  std::uint64_t next();
  /// Uniform double in [0, 1).
  double next_double();
  /// Uniform integer in [0, bound).
  std::uint64_t next_below(std::uint64_t bound);
};

/// Fisher-Yates shuffle driven by SplitMix64; reproducible across platforms,
/// unlike std::shuffle with a standard distribution.
template <typename T>
void det_shuffle(std::vector<T>& items, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace usp::text

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace lem {

// Counter-based generator: the i-th output is the SplitMix64 finalizer
// applied to key + i * golden_gamma. Output depends only on (key, counter),
// so streams can be derived per sentence and replayed on any platform.
class CounterRng {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  // Independent stream for (seed, a, b); used as (global seed, sentence id,
  // purpose) so workers never share state.
  static constexpr CounterRng stream(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b = 0) {
    std::uint64_t k = finalize(seed ^ 0x6a09e667f3bcc909ULL);
    k = finalize(k + a * kGamma + 0xbb67ae8584caa73bULL);
    k = finalize(k + b * kGamma + 0x3c6ef372fe94f82bULL);
    return CounterRng(k);
  }

  static constexpr std::uint64_t finalize(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t next_u64() {
    ++counter_;
    return finalize(key_ + counter_ * kGamma);
  }

  // Uniform in [0, n) by rejection; n must be > 0.
  constexpr std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      if (x >= threshold) return x % n;
    }
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  constexpr std::uint64_t key() const { return key_; }
  constexpr std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Fisher-Yates over the whole range.
template <typename T>
void shuffle(std::vector<T>& items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// Draws `count` distinct elements uniformly without replacement via a partial
// Fisher-Yates pass. `pool` is consumed; the drawn elements are returned in
// draw order.
template <typename T>
std::vector<T> draw_without_replacement(std::vector<T> pool, std::size_t count,
                                        CounterRng& rng) {
  if (count > pool.size()) count = pool.size();
  for (std::size_t i = 0; i < count; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_below(pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace lem

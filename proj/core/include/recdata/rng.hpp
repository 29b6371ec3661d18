#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace recdata {

// Deterministic 64-bit generator (splitmix64). The exact sequence is part
// of the reproducibility contract: a split produced with a given seed must
// be identical across platforms, compilers and releases, so no standard
// library engine or distribution is involved anywhere in split logic.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Draw in [0, bound), bound > 0. Plain modulo, so the mapping stays
  // trivial to reimplement; the bias is irrelevant at dataset scales.
  std::uint64_t next_below(std::uint64_t bound) noexcept {
    return next() % bound;
  }

 private:
  std::uint64_t state_;
};

// Fisher-Yates with the documented order: for i = n-1 down to 1,
// j = gen.next_below(i + 1), swap(v[i], v[j]).
template <typename T>
void seeded_shuffle(std::vector<T>& values, SplitMix64& gen) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(gen.next_below(i));
    using std::swap;
    swap(values[i - 1], values[j]);
  }
}

}  // namespace recdata

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recdata/dataset.hpp"
#include "recdata/rng.hpp"

namespace bench {

// Synthetic interaction table: `rows` events over ~rows/20 users and
// ~rows/50 items, ratings 1..5, monotone-ish timestamps.
inline recdata::Dataset synthetic_dataset(std::size_t rows,
                                          std::uint64_t seed = 7) {
  recdata::SplitMix64 gen(seed);
  const std::uint64_t users = std::max<std::uint64_t>(rows / 20, 10);
  const std::uint64_t items = std::max<std::uint64_t>(rows / 50, 10);
  std::vector<recdata::Interaction> out;
  out.reserve(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    out.push_back(recdata::Interaction{
        "u" + std::to_string(gen.next_below(users)),
        "i" + std::to_string(gen.next_below(items)),
        static_cast<double>(1 + gen.next_below(5)),
        static_cast<std::int64_t>(i + gen.next_below(1000))});
  }
  return recdata::build_dataset(std::move(out));
}

inline std::string synthetic_tabular_text(std::size_t rows,
                                          std::uint64_t seed = 7) {
  recdata::SplitMix64 gen(seed);
  const std::uint64_t users = std::max<std::uint64_t>(rows / 20, 10);
  const std::uint64_t items = std::max<std::uint64_t>(rows / 50, 10);
  std::string text;
  text.reserve(rows * 24);
  for (std::size_t i = 0; i < rows; ++i) {
    text += 'u';
    text += std::to_string(gen.next_below(users));
    text += '\t';
    text += 'i';
    text += std::to_string(gen.next_below(items));
    text += '\t';
    text += std::to_string(1 + gen.next_below(5));
    text += '\t';
    text += std::to_string(i);
    text += '\n';
  }
  return text;
}

}  // namespace bench

#pragma once

// Shared test fixtures and helpers.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "recdata/checksum.hpp"
#include "recdata/dataset.hpp"
#include "recdata/rng.hpp"

namespace testsupport {

inline recdata::Interaction mk(std::string user, std::string item,
                               std::optional<double> rating = std::nullopt,
                               std::optional<std::int64_t> timestamp =
                                   std::nullopt) {
  return recdata::Interaction{std::move(user), std::move(item), rating,
                              timestamp};
}

// The canonical worked example used across the suites:
// (u1,i1,5,100) (u1,i2,3,200) (u2,i1,4,150) (u2,i3,2,300) (u3,i3,5,50).
inline recdata::Dataset d0() {
  return recdata::build_dataset({
      mk("u1", "i1", 5.0, 100),
      mk("u1", "i2", 3.0, 200),
      mk("u2", "i1", 4.0, 150),
      mk("u2", "i3", 2.0, 300),
      mk("u3", "i3", 5.0, 50),
  });
}

// Two users sharing two items: already a 2-core.
inline recdata::Dataset d1() {
  return recdata::build_dataset({
      mk("u1", "i1"),
      mk("u1", "i2"),
      mk("u2", "i1"),
      mk("u2", "i2"),
  });
}

struct RandomDatasetOptions {
  std::size_t max_users = 30;
  std::size_t max_items = 30;
  std::size_t max_interactions = 300;
  std::size_t min_interactions = 1;
  bool with_ratings = true;
  bool with_timestamps = true;
};

inline recdata::Dataset random_dataset(std::uint64_t seed,
                                       const RandomDatasetOptions& options =
                                           {}) {
  recdata::SplitMix64 gen(seed);
  const std::size_t n_users = 1 + gen.next_below(options.max_users);
  const std::size_t n_items = 1 + gen.next_below(options.max_items);
  const std::size_t n =
      options.min_interactions +
      gen.next_below(options.max_interactions - options.min_interactions + 1);
  std::vector<recdata::Interaction> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    recdata::Interaction r;
    r.user = "u" + std::to_string(gen.next_below(n_users));
    r.item = "i" + std::to_string(gen.next_below(n_items));
    if (options.with_ratings) {
      r.rating = static_cast<double>(1 + gen.next_below(5));
    }
    if (options.with_timestamps) {
      r.timestamp = static_cast<std::int64_t>(gen.next_below(1000000));
    }
    rows.push_back(std::move(r));
  }
  return recdata::build_dataset(std::move(rows));
}

// --- multiset helpers (canonical line form) ---------------------------------

inline std::vector<std::string> canonical_lines(
    const std::vector<recdata::Interaction>& rows) {
  const std::string text = recdata::canonical_serialize_rows(rows);
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto eol = text.find('\n', pos);
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  // The canonical emission order is keyed on (user, item, timestamp, rating)
  // while the emitted columns put rating first, so re-sort as plain strings
  // to get a comparable multiset form.
  std::sort(lines.begin(), lines.end());
  return lines;
}

inline std::vector<std::string> canonical_lines(const recdata::Dataset& d) {
  return canonical_lines(d.interactions());
}

inline bool multiset_equal(const recdata::Dataset& a,
                           const recdata::Dataset& b) {
  return canonical_lines(a) == canonical_lines(b);
}

// True when the parts exactly partition the whole (as multisets).
inline bool multisets_partition(
    const recdata::Dataset& whole,
    const std::vector<const recdata::Dataset*>& parts) {
  std::vector<std::string> merged;
  for (const auto* part : parts) {
    const auto lines = canonical_lines(*part);
    merged.insert(merged.end(), lines.begin(), lines.end());
  }
  std::sort(merged.begin(), merged.end());
  return merged == canonical_lines(whole);
}

// (user, item) projection as a sorted multiset.
inline std::vector<std::pair<std::string, std::string>> pair_projection(
    const recdata::Dataset& d) {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(d.size());
  for (const auto& r : d.interactions()) out.emplace_back(r.user, r.item);
  std::sort(out.begin(), out.end());
  return out;
}

// --- filesystem --------------------------------------------------------------

class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    std::random_device rd;
    const auto unique = std::to_string(::getpid()) + "-" +
                        std::to_string(counter++) + "-" +
                        std::to_string(rd() % 100000);
    path_ = std::filesystem::temp_directory_path() /
            ("recdata-test-" + unique);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& bytes) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace testsupport

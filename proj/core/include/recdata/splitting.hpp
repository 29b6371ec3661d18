#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recdata/dataset.hpp"
#include "recdata/format.hpp"

namespace recdata {

// Train/validation/test partition of one dataset. Except for precomputed
// splits, the three parts are pairwise disjoint and their multiset union
// equals the input. `checksums` holds the content digest of each part in
// (test, val, train) order.
struct SplitResult {
  Dataset train;
  Dataset test;
  std::optional<Dataset> val;
  std::vector<std::pair<std::string, std::string>> checksums;
};

enum class Stratify { system, user };

// Determinism contract shared by every seeded strategy, documented so the
// splits can be reproduced outside this library:
//   * interactions are first brought into canonical order, i.e. sorted by
//     (user, item, timestamp text, rating text) exactly as in
//     canonical_serialize, so results do not depend on input order;
//   * randomness comes from a single SplitMix64 stream seeded with the
//     user seed, consumed by Fisher-Yates shuffles (see rng.hpp);
//   * user-stratified modes visit users in ascending id order and shuffle
//     each user's canonical list with the same stream;
//   * sizes use round-half-away-from-zero: |test| = round(n * test_ratio).

// System mode: shuffle everything, draw |test| = round(n * test_ratio) first,
// then |val| = round(n * val_ratio) (val_ratio is a fraction of the original
// dataset size), remainder train. User mode applies the same logic inside
// each user's history; users with fewer than two interactions go wholly to
// train, and every user keeps at least one training interaction (val shrinks
// before test when the rounded sizes would leave none).
// Throws bad_ratio unless 0 < test_ratio < 1, val_ratio >= 0 and
// test_ratio + val_ratio < 1.
SplitResult random_holdout(const Dataset& d, double test_ratio,
                           double val_ratio, std::uint64_t seed,
                           Stratify stratify = Stratify::system);

enum class LeaveDirection { out, in };

struct LeaveOrder {
  enum class Kind { temporal, random };
  Kind kind = Kind::temporal;
  std::uint64_t seed = 0;  // random only

  static LeaveOrder temporal() { return {Kind::temporal, 0}; }
  static LeaveOrder random(std::uint64_t seed) {
    return {Kind::random, seed};
  }
};

// Per-user split. `out` moves n interactions to test (temporal: the n most
// recent; random: n seeded picks); `in` keeps exactly n in train (temporal:
// the n oldest) and moves the rest to test. Users with too few interactions
// contribute everything to train; no user is ever left without a training
// interaction. val is always absent; compose a second split when one is
// needed. Temporal order requires timestamps.
SplitResult leave_n_split(const Dataset& d, std::size_t n,
                          LeaveDirection direction, LeaveOrder order);

struct TemporalMode {
  enum class Kind { fixed_timestamp, best_ratio_cutoff, by_ratio };
  Kind kind = Kind::by_ratio;
  std::int64_t cutoff = 0;                  // fixed_timestamp
  double test_ratio = 0.0;                  // best_ratio_cutoff, by_ratio
  Stratify stratify = Stratify::system;     // by_ratio

  static TemporalMode fixed(std::int64_t cutoff) {
    return {Kind::fixed_timestamp, cutoff, 0.0, Stratify::system};
  }
  static TemporalMode best_ratio(double test_ratio) {
    return {Kind::best_ratio_cutoff, 0, test_ratio, Stratify::system};
  }
  static TemporalMode by_ratio(double test_ratio,
                               Stratify stratify = Stratify::system) {
    return {Kind::by_ratio, 0, test_ratio, stratify};
  }
};

// fixed_timestamp: train t < cutoff, test t >= cutoff. best_ratio_cutoff:
// the cutoff among observed timestamps whose achieved test fraction is
// closest to test_ratio (ties -> earlier cutoff), then the fixed split.
// by_ratio: chronological sort (ties by canonical user/item order), the
// most recent round(n * ratio) interactions to test; user stratification
// applies it per user with the usual small-profile protections.
// Throws no_timestamps / bad_ratio.
SplitResult temporal_split(const Dataset& d, const TemporalMode& mode);

struct FoldSet {
  enum class Kind { k_repeated_holdout, cross_validation };
  Kind kind = Kind::k_repeated_holdout;
  std::vector<SplitResult> folds;
};

// K independent random hold-outs with derived seeds seed + i (i = 0..K-1).
// Test sets of different repetitions may overlap.
FoldSet k_repeated_holdout(const Dataset& d, std::size_t repetitions,
                           double test_ratio, std::uint64_t seed,
                           Stratify stratify = Stratify::system);

// k-fold cross-validation, k >= 2. System: one shuffle of the canonical
// list, positions dealt round-robin (position % k) into folds whose sizes
// differ by at most one; fold i is the test of split i and the rest train.
// User: each user's shuffled history is dealt round-robin, so a user
// appears in min(|history|, k) test folds. Test folds are pairwise disjoint
// and exactly cover the input in both modes.
// Throws too_few_interactions when System and n < k.
FoldSet cross_validation(const Dataset& d, std::size_t k, std::uint64_t seed,
                         Stratify stratify = Stratify::system);

// Loads a published split from files. Disjointness is checked and reported
// (overlap is recorded in provenance, not an error; published splits
// sometimes overlap). A missing val source simply leaves val absent.
SplitResult precomputed_split(const std::filesystem::path& train_src,
                              const std::filesystem::path& test_src,
                              const std::optional<std::filesystem::path>& val_src,
                              const FormatSpec& spec);

}  // namespace recdata

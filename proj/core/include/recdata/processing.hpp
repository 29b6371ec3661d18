#pragma once

#include <cstdint>
#include <optional>

#include "recdata/dataset.hpp"

namespace recdata {

// All transformations return a new Dataset carrying one appended provenance
// step; the input is never touched. Threshold comparisons are uniformly
// ">= keeps, < drops".

enum class BinarizeMode { drop_below, zero_one };

// Converts explicit ratings to implicit feedback. drop_below keeps only
// interactions rated >= threshold and sets their rating to 1; zero_one keeps
// everything and maps the rating to 1 (>= threshold) or 0.
// Throws no_ratings on a rating-less dataset.
Dataset binarize(const Dataset& d, double threshold, BinarizeMode mode);

enum class KCoreMode { user, item, iterative };

// user/item: one pass removing all interactions of users (items) with fewer
// than k interactions. iterative: repeats rounds of one user pass followed by
// one item pass until a full round removes nothing, or max_rounds rounds have
// run. The appended step records the rounds executed and whether the fixpoint
// was reached; stopping early returns the partial result rather than failing.
// An empty result is legal.
Dataset kcore(const Dataset& d, std::size_t k, KCoreMode mode,
              std::optional<std::size_t> max_rounds = std::nullopt);

// Retains only users with at least min_interactions interactions. Same
// semantics as kcore(d, min_interactions, user); kept as a separately named
// operation so recorded pipelines state the intent.
Dataset drop_cold_users(const Dataset& d, std::size_t min_interactions);

struct RatingThreshold {
  enum class Kind { fixed, global_mean, user_mean };
  Kind kind = Kind::fixed;
  double value = 0.0;  // fixed only

  static RatingThreshold fixed(double v) {
    return {Kind::fixed, v};
  }
  static RatingThreshold global_mean() { return {Kind::global_mean, 0.0}; }
  static RatingThreshold user_mean() { return {Kind::user_mean, 0.0}; }
};

// Keeps interactions whose rating is >= the resolved threshold: a fixed
// value, the dataset-wide mean, or the interacting user's mean rating.
// Throws no_ratings on a rating-less dataset.
Dataset filter_by_rating(const Dataset& d, RatingThreshold threshold);

enum class TimeKeep { before, after };

// before keeps t < cutoff, after keeps t >= cutoff; the two options exactly
// partition the dataset. Throws no_timestamps.
Dataset filter_by_time(const Dataset& d, std::int64_t cutoff, TimeKeep keep);

}  // namespace recdata

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace recdata {

class Dataset;

// Characterization metrics of an interaction dataset.
//
// "Average ratings per user/item" is reported under both readings: profile
// size (interactions per user/item) and mean rating value; the latter is
// absent for rating-less datasets.
struct MetricsReport {
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::size_t n_interactions = 0;
  double space_size = 0.0;  // sqrt(|U| * |I|)
  double shape = 0.0;       // |U| / |I|
  double density = 0.0;     // |R| / (|U| * |I|)
  double gini_users = 0.0;
  double gini_items = 0.0;
  double mean_profile_user = 0.0;  // |R| / |U|
  double mean_profile_item = 0.0;  // |R| / |I|
  std::optional<double> mean_rating_user;  // macro-average of user means
  std::optional<double> mean_rating_item;  // macro-average of item means
};

// Throws empty_dataset when d has no interactions.
MetricsReport metrics_report(const Dataset& d);

// Gini coefficient of a count distribution, clamped to [0, 1]:
// G = (2 * sum_i i * x_(i)) / (n * sum x) - (n + 1) / n with x sorted
// ascending and i 1-based. Zero for perfectly uniform counts. Throws
// all_zero when every count is zero.
double gini(const std::vector<std::uint64_t>& counts);

// Linear-interpolation quantile of an ascending-sorted sample:
// h = (n - 1) * p, interpolate between the order statistics at floor(h)
// and floor(h) + 1.
double quantile_sorted(const std::vector<double>& sorted_values, double p);

enum class PopularityClass { long_tail, common, popular, most_popular };
enum class Axis { users, items };

std::string_view to_string(PopularityClass c);

using PopularityClasses = std::unordered_map<std::string, PopularityClass>;

// Quartile-based classification of entities by interaction count. With
// Q1/Q2/Q3 the quartiles of the per-entity count distribution:
// count <= Q1 -> long_tail, <= Q2 -> common, <= Q3 -> popular,
// > Q3 -> most_popular. Boundaries are inclusive on the lower class.
// Throws empty_dataset when d has no interactions.
PopularityClasses popularity_classify(const Dataset& d, Axis axis);

}  // namespace recdata

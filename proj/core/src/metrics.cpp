#include "recdata/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "recdata/dataset.hpp"
#include "recdata/errors.hpp"

namespace recdata {

namespace {

struct EntityStats {
  std::unordered_map<std::string, std::uint64_t> counts;
  std::unordered_map<std::string, double> rating_sums;
};

EntityStats collect(const Dataset& d, Axis axis) {
  EntityStats stats;
  for (const auto& r : d.interactions()) {
    const std::string& key = (axis == Axis::users) ? r.user : r.item;
    ++stats.counts[key];
    if (r.rating) stats.rating_sums[key] += *r.rating;
  }
  return stats;
}

std::vector<std::uint64_t> count_values(const EntityStats& stats) {
  std::vector<std::uint64_t> out;
  out.reserve(stats.counts.size());
  for (const auto& [_, c] : stats.counts) out.push_back(c);
  return out;
}

double macro_mean_rating(const EntityStats& stats) {
  double sum = 0.0;
  for (const auto& [key, total] : stats.rating_sums) {
    sum += total / static_cast<double>(stats.counts.at(key));
  }
  return sum / static_cast<double>(stats.counts.size());
}

}  // namespace

double gini(const std::vector<std::uint64_t>& counts) {
  const std::size_t n = counts.size();
  if (n == 0) fail(errc::all_zero, "gini of an empty count list");
  std::vector<std::uint64_t> sorted(counts);
  std::sort(sorted.begin(), sorted.end());

  long double total = 0.0L;
  long double weighted = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    total += sorted[i];
    weighted += static_cast<long double>(i + 1) * sorted[i];
  }
  if (total == 0.0L) {
    fail(errc::all_zero, "gini requires at least one positive count");
  }
  const long double g = 2.0L * weighted / (static_cast<long double>(n) * total) -
                        static_cast<long double>(n + 1) / n;
  return std::clamp(static_cast<double>(g), 0.0, 1.0);
}

double quantile_sorted(const std::vector<double>& sorted_values, double p) {
  const std::size_t n = sorted_values.size();
  if (n == 0) fail(errc::empty_dataset, "quantile of an empty sample");
  if (n == 1) return sorted_values[0];
  const double h = static_cast<double>(n - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) return sorted_values[n - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

MetricsReport metrics_report(const Dataset& d) {
  if (d.empty()) {
    fail(errc::empty_dataset, "metrics require a non-empty dataset");
  }

  const EntityStats users = collect(d, Axis::users);
  const EntityStats items = collect(d, Axis::items);

  MetricsReport report;
  report.n_users = users.counts.size();
  report.n_items = items.counts.size();
  report.n_interactions = d.size();

  const auto nu = static_cast<double>(report.n_users);
  const auto ni = static_cast<double>(report.n_items);
  const auto nr = static_cast<double>(report.n_interactions);
  report.space_size = std::sqrt(nu * ni);
  report.shape = nu / ni;
  report.density = nr / (nu * ni);
  report.gini_users = gini(count_values(users));
  report.gini_items = gini(count_values(items));
  report.mean_profile_user = nr / nu;
  report.mean_profile_item = nr / ni;
  if (d.has_ratings()) {
    report.mean_rating_user = macro_mean_rating(users);
    report.mean_rating_item = macro_mean_rating(items);
  }
  return report;
}

std::string_view to_string(PopularityClass c) {
  switch (c) {
    case PopularityClass::long_tail:
      return "long_tail";
    case PopularityClass::common:
      return "common";
    case PopularityClass::popular:
      return "popular";
    case PopularityClass::most_popular:
      return "most_popular";
  }
  return "?";
}

PopularityClasses popularity_classify(const Dataset& d, Axis axis) {
  if (d.empty()) {
    fail(errc::empty_dataset, "popularity classes require a non-empty dataset");
  }
  const EntityStats stats = collect(d, axis);

  std::vector<double> distribution;
  distribution.reserve(stats.counts.size());
  for (const auto& [_, c] : stats.counts) {
    distribution.push_back(static_cast<double>(c));
  }
  std::sort(distribution.begin(), distribution.end());
  const double q1 = quantile_sorted(distribution, 0.25);
  const double q2 = quantile_sorted(distribution, 0.50);
  const double q3 = quantile_sorted(distribution, 0.75);

  PopularityClasses classes;
  classes.reserve(stats.counts.size());
  for (const auto& [key, count] : stats.counts) {
    const auto c = static_cast<double>(count);
    PopularityClass cls = PopularityClass::most_popular;
    if (c <= q1) {
      cls = PopularityClass::long_tail;
    } else if (c <= q2) {
      cls = PopularityClass::common;
    } else if (c <= q3) {
      cls = PopularityClass::popular;
    }
    classes.emplace(key, cls);
  }
  return classes;
}

}  // namespace recdata

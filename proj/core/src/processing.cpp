#include "recdata/processing.hpp"

#include <algorithm>
#include <string>
#include <unordered_map>
#include <vector>

#include "recdata/errors.hpp"

namespace recdata {

namespace {

void require_ratings(const Dataset& d, const char* op) {
  if (!d.has_ratings()) {
    fail(errc::no_ratings, std::string(op) + " requires a dataset with ratings");
  }
}

void require_timestamps(const Dataset& d, const char* op) {
  if (!d.has_timestamps()) {
    fail(errc::no_timestamps,
         std::string(op) + " requires a dataset with timestamps");
  }
}

std::vector<Interaction> select(const Dataset& d,
                                const std::vector<char>& keep) {
  std::vector<Interaction> out;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i]) out.push_back(d.interactions()[i]);
  }
  return out;
}

// One pruning pass over the alive set: drops every interaction whose user
// (or item) has fewer than k alive interactions. Returns how many fell.
std::size_t prune_pass(const Dataset& d, std::vector<char>& alive,
                       std::size_t k, bool by_user) {
  std::unordered_map<std::string, std::size_t> degree;
  const auto& rows = d.interactions();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (alive[i]) ++degree[by_user ? rows[i].user : rows[i].item];
  }
  std::size_t removed = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (alive[i] && degree[by_user ? rows[i].user : rows[i].item] < k) {
      alive[i] = 0;
      ++removed;
    }
  }
  return removed;
}

}  // namespace

Dataset binarize(const Dataset& d, double threshold, BinarizeMode mode) {
  require_ratings(d, "Binarize");
  std::vector<Interaction> out;
  out.reserve(d.size());
  for (const auto& r : d.interactions()) {
    if (mode == BinarizeMode::drop_below) {
      if (*r.rating >= threshold) {
        Interaction kept = r;
        kept.rating = 1.0;
        out.push_back(std::move(kept));
      }
    } else {
      Interaction kept = r;
      kept.rating = (*r.rating >= threshold) ? 1.0 : 0.0;
      out.push_back(std::move(kept));
    }
  }
  ParamList params;
  set_param(params, "threshold", threshold);
  set_param(params, "mode", std::string(mode == BinarizeMode::drop_below
                                            ? "drop_below"
                                            : "zero_one"));
  return d.derive(std::move(out),
                  ProvenanceStep{StepCategory::process, "Binarize",
                                 std::move(params), {}});
}

Dataset kcore(const Dataset& d, std::size_t k, KCoreMode mode,
              std::optional<std::size_t> max_rounds) {
  std::vector<char> alive(d.size(), 1);

  const char* op = "UserKCore";
  ParamList params;
  set_param(params, "cores", static_cast<std::int64_t>(k));

  if (mode == KCoreMode::user) {
    prune_pass(d, alive, k, /*by_user=*/true);
  } else if (mode == KCoreMode::item) {
    op = "ItemKCore";
    prune_pass(d, alive, k, /*by_user=*/false);
  } else {
    op = "UserItemIterativeKCore";
    if (max_rounds) {
      set_param(params, "max_rounds", static_cast<std::int64_t>(*max_rounds));
    }
    std::size_t rounds = 0;
    bool fixpoint = false;
    while (!max_rounds || rounds < *max_rounds) {
      ++rounds;
      std::size_t removed = prune_pass(d, alive, k, /*by_user=*/true);
      removed += prune_pass(d, alive, k, /*by_user=*/false);
      if (removed == 0) {
        fixpoint = true;
        break;
      }
    }
    if (!fixpoint) {
      // An emptied dataset is trivially a fixpoint even when the round
      // budget ran out first.
      fixpoint = std::none_of(alive.begin(), alive.end(),
                              [](char a) { return a != 0; });
    }
    set_param(params, "rounds", static_cast<std::int64_t>(rounds));
    set_param(params, "fixpoint", fixpoint);
  }

  return d.derive(select(d, alive),
                  ProvenanceStep{StepCategory::process, op, std::move(params),
                                 {}});
}

Dataset drop_cold_users(const Dataset& d, std::size_t min_interactions) {
  std::vector<char> alive(d.size(), 1);
  prune_pass(d, alive, min_interactions, /*by_user=*/true);
  ParamList params;
  set_param(params, "min_interactions",
            static_cast<std::int64_t>(min_interactions));
  return d.derive(select(d, alive),
                  ProvenanceStep{StepCategory::process, "ColdUsers",
                                 std::move(params), {}});
}

Dataset filter_by_rating(const Dataset& d, RatingThreshold threshold) {
  require_ratings(d, "FilterByRating");

  ParamList params;
  std::vector<char> keep(d.size(), 0);
  const auto& rows = d.interactions();

  switch (threshold.kind) {
    case RatingThreshold::Kind::fixed: {
      set_param(params, "kind", std::string("fixed"));
      set_param(params, "value", threshold.value);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        keep[i] = *rows[i].rating >= threshold.value;
      }
      break;
    }
    case RatingThreshold::Kind::global_mean: {
      double sum = 0.0;
      for (const auto& r : rows) sum += *r.rating;
      const double mean = d.empty() ? 0.0 : sum / static_cast<double>(d.size());
      set_param(params, "kind", std::string("global_mean"));
      set_param(params, "resolved_threshold", mean);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        keep[i] = *rows[i].rating >= mean;
      }
      break;
    }
    case RatingThreshold::Kind::user_mean: {
      set_param(params, "kind", std::string("user_mean"));
      std::unordered_map<std::string, std::pair<double, std::size_t>> acc;
      for (const auto& r : rows) {
        auto& [sum, count] = acc[r.user];
        sum += *r.rating;
        ++count;
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [sum, count] = acc[rows[i].user];
        keep[i] = *rows[i].rating >= sum / static_cast<double>(count);
      }
      break;
    }
  }

  return d.derive(select(d, keep),
                  ProvenanceStep{StepCategory::process, "FilterByRating",
                                 std::move(params), {}});
}

Dataset filter_by_time(const Dataset& d, std::int64_t cutoff, TimeKeep keep) {
  require_timestamps(d, "FilterByTime");
  std::vector<char> mask(d.size(), 0);
  const auto& rows = d.interactions();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool after = *rows[i].timestamp >= cutoff;
    mask[i] = (keep == TimeKeep::after) ? after : !after;
  }
  ParamList params;
  set_param(params, "cutoff", cutoff);
  set_param(params, "keep",
            std::string(keep == TimeKeep::before ? "before" : "after"));
  return d.derive(select(d, mask),
                  ProvenanceStep{StepCategory::process, "FilterByTime",
                                 std::move(params), {}});
}

}  // namespace recdata

#include "recdata/splitting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "recdata/io.hpp"
#include "recdata/rng.hpp"

namespace recdata {

namespace {

std::size_t round_count(double x) {
  // Round half away from zero; x is never negative here.
  return static_cast<std::size_t>(std::llround(x));
}

const char* to_string(Stratify s) {
  return s == Stratify::system ? "system" : "user";
}

void check_holdout_ratios(double test_ratio, double val_ratio) {
  if (!(test_ratio > 0.0) || !(test_ratio < 1.0) || !(val_ratio >= 0.0) ||
      !(test_ratio + val_ratio < 1.0)) {
    fail(errc::bad_ratio,
         "need 0 < test_ratio < 1, val_ratio >= 0 and "
         "test_ratio + val_ratio < 1 (got test_ratio=" +
             render_double(test_ratio) + ", val_ratio=" +
             render_double(val_ratio) + ")");
  }
}

void check_test_ratio(double test_ratio) {
  if (!(test_ratio > 0.0) || !(test_ratio < 1.0)) {
    fail(errc::bad_ratio,
         "need 0 < test_ratio < 1 (got " + render_double(test_ratio) + ")");
  }
}

// Users in ascending id order, each with its interaction indices in
// canonical order. Part of the determinism contract.
std::vector<std::pair<std::string, std::vector<std::size_t>>> group_by_user(
    const Dataset& d) {
  std::map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i : canonical_order(d.interactions())) {
    groups[d.interactions()[i].user].push_back(i);
  }
  std::vector<std::pair<std::string, std::vector<std::size_t>>> out;
  out.reserve(groups.size());
  for (auto& [user, idx] : groups) out.emplace_back(user, std::move(idx));
  return out;
}

// Ascending time; ties broken by the canonical (user, item, rating) text
// order so chronological splits are reproducible.
std::vector<std::size_t> chronological_order(const Dataset& d) {
  const auto& rows = d.interactions();
  std::vector<std::string> rating_text(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].rating) rating_text[i] = render_rating(*rows[i].rating);
  }
  std::vector<std::size_t> order(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(*rows[a].timestamp, rows[a].user, rows[a].item,
                    rating_text[a]) < std::tie(*rows[b].timestamp, rows[b].user,
                                               rows[b].item, rating_text[b]);
  });
  return order;
}

std::vector<Interaction> take(const Dataset& d, std::vector<std::size_t> idx) {
  // Outputs keep the input's row order.
  std::sort(idx.begin(), idx.end());
  std::vector<Interaction> rows;
  rows.reserve(idx.size());
  for (std::size_t i : idx) rows.push_back(d.interactions()[i]);
  return rows;
}

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::optional<std::vector<std::size_t>> val;
};

SplitResult assemble(const Dataset& d, std::string operation, ParamList params,
                     IndexSplit idx) {
  std::vector<Interaction> train_rows = take(d, std::move(idx.train));
  std::vector<Interaction> test_rows = take(d, std::move(idx.test));
  std::optional<std::vector<Interaction>> val_rows;
  if (idx.val) val_rows = take(d, std::move(*idx.val));

  StepChecksum::Named digests;
  digests.emplace_back("test", checksum_rows(test_rows));
  if (val_rows) digests.emplace_back("val", checksum_rows(*val_rows));
  digests.emplace_back("train", checksum_rows(train_rows));

  ProvenanceStep step{StepCategory::split, std::move(operation),
                      std::move(params), StepChecksum(digests)};

  SplitResult result;
  result.train = d.derive(std::move(train_rows), step);
  result.test = d.derive(std::move(test_rows), step);
  if (val_rows) result.val = d.derive(std::move(*val_rows), std::move(step));
  result.checksums = std::move(digests);
  return result;
}

IndexSplit holdout_indices(const Dataset& d, double test_ratio,
                           double val_ratio, std::uint64_t seed,
                           Stratify stratify) {
  SplitMix64 gen(seed);
  IndexSplit out;
  if (val_ratio > 0.0) out.val.emplace();

  if (stratify == Stratify::system) {
    std::vector<std::size_t> idx = canonical_order(d.interactions());
    seeded_shuffle(idx, gen);
    const std::size_t n = idx.size();
    const std::size_t n_test = round_count(static_cast<double>(n) * test_ratio);
    const std::size_t n_val = round_count(static_cast<double>(n) * val_ratio);
    out.test.assign(idx.begin(), idx.begin() + n_test);
    if (out.val) {
      out.val->assign(idx.begin() + n_test, idx.begin() + n_test + n_val);
    }
    out.train.assign(idx.begin() + n_test + n_val, idx.end());
    return out;
  }

  for (auto& [user, idx] : group_by_user(d)) {
    const std::size_t nu = idx.size();
    if (nu < 2) {
      out.train.insert(out.train.end(), idx.begin(), idx.end());
      continue;
    }
    seeded_shuffle(idx, gen);
    std::size_t n_test = round_count(static_cast<double>(nu) * test_ratio);
    std::size_t n_val = round_count(static_cast<double>(nu) * val_ratio);
    // Keep at least one training interaction; val gives way before test.
    while (n_test + n_val >= nu && n_val > 0) --n_val;
    while (n_test + n_val >= nu && n_test > 0) --n_test;
    out.test.insert(out.test.end(), idx.begin(), idx.begin() + n_test);
    if (out.val) {
      out.val->insert(out.val->end(), idx.begin() + n_test,
                      idx.begin() + n_test + n_val);
    }
    out.train.insert(out.train.end(), idx.begin() + n_test + n_val, idx.end());
  }
  return out;
}

}  // namespace

SplitResult random_holdout(const Dataset& d, double test_ratio,
                           double val_ratio, std::uint64_t seed,
                           Stratify stratify) {
  check_holdout_ratios(test_ratio, val_ratio);
  ParamList params;
  set_param(params, "test_ratio", test_ratio);
  set_param(params, "val_ratio", val_ratio);
  set_param(params, "seed", static_cast<std::int64_t>(seed));
  set_param(params, "stratify", std::string(to_string(stratify)));
  return assemble(d, "RandomHoldOut", std::move(params),
                  holdout_indices(d, test_ratio, val_ratio, seed, stratify));
}

SplitResult leave_n_split(const Dataset& d, std::size_t n,
                          LeaveDirection direction, LeaveOrder order) {
  if (n == 0) fail(errc::bad_params, "leave-n split needs n >= 1");
  const bool temporal = order.kind == LeaveOrder::Kind::temporal;
  if (temporal && !d.has_timestamps()) {
    fail(errc::no_timestamps, "temporal leave-n split needs timestamps");
  }

  SplitMix64 gen(order.seed);
  IndexSplit out;

  for (auto& [user, idx] : group_by_user(d)) {
    const std::size_t nu = idx.size();
    if (temporal) {
      const auto& rows = d.interactions();
      std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return std::tie(*rows[a].timestamp, rows[a].user, rows[a].item) <
               std::tie(*rows[b].timestamp, rows[b].user, rows[b].item);
      });
    } else {
      seeded_shuffle(idx, gen);
    }

    if (nu <= n) {
      // Too small to give anything away (out) or fully retained (in).
      out.train.insert(out.train.end(), idx.begin(), idx.end());
      continue;
    }
    if (direction == LeaveDirection::out) {
      // Temporal: last n are the most recent. Random: the first n picks of
      // the shuffle; rotate them to the end so both orders slice alike.
      if (!temporal) std::rotate(idx.begin(), idx.begin() + n, idx.end());
      out.train.insert(out.train.end(), idx.begin(), idx.end() - n);
      out.test.insert(out.test.end(), idx.end() - n, idx.end());
    } else {
      // Keep exactly n in train: the n oldest, or the first n picks.
      out.train.insert(out.train.end(), idx.begin(), idx.begin() + n);
      out.test.insert(out.test.end(), idx.begin() + n, idx.end());
    }
  }

  ParamList params;
  set_param(params, "n", static_cast<std::int64_t>(n));
  set_param(params, "order",
            std::string(temporal ? "temporal" : "random"));
  if (!temporal) set_param(params, "seed", static_cast<std::int64_t>(order.seed));
  return assemble(d,
                  direction == LeaveDirection::out ? "LeaveNOut" : "LeaveNIn",
                  std::move(params), std::move(out));
}

SplitResult temporal_split(const Dataset& d, const TemporalMode& mode) {
  if (!d.has_timestamps()) {
    fail(errc::no_timestamps, "temporal split needs timestamps");
  }

  if (mode.kind == TemporalMode::Kind::fixed_timestamp ||
      mode.kind == TemporalMode::Kind::best_ratio_cutoff) {
    std::int64_t cutoff = mode.cutoff;
    ParamList params;
    std::string operation = "TemporalFixedTimestamp";

    if (mode.kind == TemporalMode::Kind::best_ratio_cutoff) {
      check_test_ratio(mode.test_ratio);
      operation = "TemporalBestRatio";
      const std::size_t n = d.size();
      if (n == 0) fail(errc::empty_dataset, "cannot pick a cutoff without data");
      std::vector<std::int64_t> stamps;
      stamps.reserve(n);
      for (const auto& r : d.interactions()) stamps.push_back(*r.timestamp);
      std::sort(stamps.begin(), stamps.end());
      std::vector<std::int64_t> candidates(stamps);
      candidates.erase(std::unique(candidates.begin(), candidates.end()),
                       candidates.end());

      double best_err = 2.0;
      for (const std::int64_t candidate : candidates) {
        const auto first =
            std::lower_bound(stamps.begin(), stamps.end(), candidate);
        const auto test_count = static_cast<std::size_t>(stamps.end() - first);
        const double frac =
            static_cast<double>(test_count) / static_cast<double>(n);
        const double err = std::abs(frac - mode.test_ratio);
        if (err < best_err) {  // ties keep the earlier cutoff
          best_err = err;
          cutoff = candidate;
        }
      }
      set_param(params, "test_ratio", mode.test_ratio);
      set_param(params, "cutoff", cutoff);
    } else {
      set_param(params, "timestamp", cutoff);
    }

    IndexSplit idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (*d.interactions()[i].timestamp >= cutoff) {
        idx.test.push_back(i);
      } else {
        idx.train.push_back(i);
      }
    }
    return assemble(d, std::move(operation), std::move(params),
                    std::move(idx));
  }

  // by_ratio
  check_test_ratio(mode.test_ratio);
  IndexSplit idx;
  if (mode.stratify == Stratify::system) {
    std::vector<std::size_t> order = chronological_order(d);
    const std::size_t n_test =
        round_count(static_cast<double>(order.size()) * mode.test_ratio);
    idx.train.assign(order.begin(), order.end() - n_test);
    idx.test.assign(order.end() - n_test, order.end());
  } else {
    for (auto& [user, user_idx] : group_by_user(d)) {
      const auto& rows = d.interactions();
      std::sort(user_idx.begin(), user_idx.end(),
                [&](std::size_t a, std::size_t b) {
                  return std::tie(*rows[a].timestamp, rows[a].user,
                                  rows[a].item) <
                         std::tie(*rows[b].timestamp, rows[b].user,
                                  rows[b].item);
                });
      const std::size_t nu = user_idx.size();
      std::size_t n_test =
          round_count(static_cast<double>(nu) * mode.test_ratio);
      if (nu < 2) n_test = 0;
      if (n_test >= nu) n_test = nu - 1;  // at least one stays in train
      idx.train.insert(idx.train.end(), user_idx.begin(),
                       user_idx.end() - n_test);
      idx.test.insert(idx.test.end(), user_idx.end() - n_test,
                      user_idx.end());
    }
  }
  ParamList params;
  set_param(params, "test_ratio", mode.test_ratio);
  set_param(params, "stratify", std::string(to_string(mode.stratify)));
  return assemble(d, "TemporalHoldOut", std::move(params), std::move(idx));
}

FoldSet k_repeated_holdout(const Dataset& d, std::size_t repetitions,
                           double test_ratio, std::uint64_t seed,
                           Stratify stratify) {
  if (repetitions == 0) {
    fail(errc::bad_params, "k-repeated hold-out needs at least one repetition");
  }
  check_holdout_ratios(test_ratio, 0.0);

  FoldSet folds;
  folds.kind = FoldSet::Kind::k_repeated_holdout;
  for (std::size_t i = 0; i < repetitions; ++i) {
    ParamList params;
    set_param(params, "repetitions", static_cast<std::int64_t>(repetitions));
    set_param(params, "test_ratio", test_ratio);
    set_param(params, "seed", static_cast<std::int64_t>(seed));
    set_param(params, "stratify", std::string(to_string(stratify)));
    set_param(params, "fold", static_cast<std::int64_t>(i));
    folds.folds.push_back(assemble(
        d, "KRepeatedHoldOut", std::move(params),
        holdout_indices(d, test_ratio, 0.0, seed + i, stratify)));
  }
  return folds;
}

FoldSet cross_validation(const Dataset& d, std::size_t k, std::uint64_t seed,
                         Stratify stratify) {
  if (k < 2) fail(errc::bad_params, "cross-validation needs k >= 2");
  if (stratify == Stratify::system && d.size() < k) {
    fail(errc::too_few_interactions,
         "cross-validation needs at least k interactions (" +
             std::to_string(d.size()) + " < " + std::to_string(k) + ")");
  }

  std::vector<std::size_t> fold_of(d.size(), 0);
  SplitMix64 gen(seed);
  if (stratify == Stratify::system) {
    std::vector<std::size_t> idx = canonical_order(d.interactions());
    seeded_shuffle(idx, gen);
    for (std::size_t pos = 0; pos < idx.size(); ++pos) {
      fold_of[idx[pos]] = pos % k;
    }
  } else {
    for (auto& [user, idx] : group_by_user(d)) {
      seeded_shuffle(idx, gen);
      for (std::size_t pos = 0; pos < idx.size(); ++pos) {
        fold_of[idx[pos]] = pos % k;
      }
    }
  }

  FoldSet folds;
  folds.kind = FoldSet::Kind::cross_validation;
  for (std::size_t f = 0; f < k; ++f) {
    IndexSplit idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      (fold_of[i] == f ? idx.test : idx.train).push_back(i);
    }
    ParamList params;
    set_param(params, "folds", static_cast<std::int64_t>(k));
    set_param(params, "seed", static_cast<std::int64_t>(seed));
    set_param(params, "stratify", std::string(to_string(stratify)));
    set_param(params, "fold", static_cast<std::int64_t>(f));
    folds.folds.push_back(
        assemble(d, "CrossValidation", std::move(params), std::move(idx)));
  }
  return folds;
}

SplitResult precomputed_split(
    const std::filesystem::path& train_src,
    const std::filesystem::path& test_src,
    const std::optional<std::filesystem::path>& val_src,
    const FormatSpec& spec) {
  Dataset train = read_dataset(train_src, spec);
  Dataset test = read_dataset(test_src, spec);
  std::optional<Dataset> val;
  if (val_src) val = read_dataset(*val_src, spec);

  auto sorted_lines = [](const Dataset& d) {
    std::string text = canonical_serialize(d);
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto eol = text.find('\n', pos);
      lines.push_back(text.substr(pos, eol - pos));
      pos = eol + 1;
    }
    std::sort(lines.begin(), lines.end());
    return lines;
  };
  auto overlaps = [&](const Dataset& a, const Dataset& b) {
    const auto la = sorted_lines(a);
    const auto lb = sorted_lines(b);
    std::vector<std::string> common;
    std::set_intersection(la.begin(), la.end(), lb.begin(), lb.end(),
                          std::back_inserter(common));
    return !common.empty();
  };
  const bool overlapping = overlaps(train, test) ||
                           (val && (overlaps(train, *val) ||
                                    overlaps(test, *val)));

  StepChecksum::Named digests;
  digests.emplace_back("test", checksum(test));
  if (val) digests.emplace_back("val", checksum(*val));
  digests.emplace_back("train", checksum(train));

  ParamList params;
  set_param(params, "train_path", train_src.string());
  set_param(params, "test_path", test_src.string());
  if (val_src) set_param(params, "val_path", val_src->string());
  if (overlapping) set_param(params, "overlapping", true);

  ProvenanceStep step{StepCategory::split, "PrecomputedSplit",
                      std::move(params), StepChecksum(digests)};

  SplitResult result;
  result.train = train.with_step(step);
  result.test = test.with_step(step);
  if (val) result.val = val->with_step(std::move(step));
  result.checksums = std::move(digests);
  return result;
}

}  // namespace recdata

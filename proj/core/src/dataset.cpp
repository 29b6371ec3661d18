#include "recdata/dataset.hpp"

#include <cmath>
#include <utility>

#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "text_util.hpp"

namespace recdata {

namespace {

struct SchemaFlags {
  bool has_ratings = false;
  bool has_timestamps = false;
};

SchemaFlags validate_records(const std::vector<Interaction>& records) {
  SchemaFlags flags;
  bool first = true;
  std::size_t index = 0;
  for (const auto& r : records) {
    ++index;
    if (detail::is_blank(r.user) || detail::is_blank(r.item)) {
      fail(errc::empty_field, "record " + std::to_string(index) +
                                  ": user and item ids must be non-empty");
    }
    if (r.rating && !std::isfinite(*r.rating)) {
      throw ParseError("record " + std::to_string(index) +
                       ": rating is not a finite number");
    }
    if (first) {
      flags.has_ratings = r.rating.has_value();
      flags.has_timestamps = r.timestamp.has_value();
      first = false;
      continue;
    }
    if (r.rating.has_value() != flags.has_ratings) {
      fail(errc::mixed_schema,
           "record " + std::to_string(index) +
               ": rating presence differs from earlier records");
    }
    if (r.timestamp.has_value() != flags.has_timestamps) {
      fail(errc::mixed_schema,
           "record " + std::to_string(index) +
               ": timestamp presence differs from earlier records");
    }
  }
  return flags;
}

}  // namespace

Dataset Dataset::with_step(ProvenanceStep step) const {
  validate_step(step);
  Dataset out = *this;
  out.history_.push_back(std::move(step));
  return out;
}

Dataset Dataset::derive(std::vector<Interaction> interactions,
                        ProvenanceStep step) const {
  const SchemaFlags flags = validate_records(interactions);
  Dataset out;
  out.interactions_ = std::move(interactions);
  out.has_ratings_ = flags.has_ratings;
  out.has_timestamps_ = flags.has_timestamps;
  out.history_ = history_;
  if (step.checksum.empty()) {
    step.checksum = StepChecksum(checksum(out));
  }
  validate_step(step);
  out.history_.push_back(std::move(step));
  return out;
}

Dataset build_dataset(std::vector<Interaction> records,
                      ProvenanceStep load_step) {
  const SchemaFlags flags = validate_records(records);
  Dataset out;
  out.interactions_ = std::move(records);
  out.has_ratings_ = flags.has_ratings;
  out.has_timestamps_ = flags.has_timestamps;
  if (load_step.checksum.empty()) {
    load_step.checksum = StepChecksum(checksum(out));
  }
  validate_step(load_step);
  out.history_.push_back(std::move(load_step));
  return out;
}

Dataset build_dataset(std::vector<Interaction> records) {
  return build_dataset(std::move(records),
                       ProvenanceStep{StepCategory::load, "InMemory", {}, {}});
}

Dataset append_history(const Dataset& d, ProvenanceStep step) {
  return d.with_step(std::move(step));
}

}  // namespace recdata

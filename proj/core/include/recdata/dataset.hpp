#pragma once

#include <cstddef>
#include <vector>

#include "recdata/interaction.hpp"
#include "recdata/provenance.hpp"

namespace recdata {

// Ordered multiset of interactions plus the append-only history of the
// operations that produced it.
//
// Datasets are immutable values: no operation mutates one in place, every
// transformation returns a new Dataset with exactly one appended step. They
// are safe to share between threads.
//
// Rating and timestamp presence is all-or-nothing: a dataset either carries
// ratings on every interaction or on none (same for timestamps). Mixed
// presence is rejected at construction; schema changes are explicit
// operations, never silent coercion.
class Dataset {
 public:
  Dataset() = default;

  const std::vector<Interaction>& interactions() const noexcept {
    return interactions_;
  }
  const std::vector<ProvenanceStep>& history() const noexcept {
    return history_;
  }
  bool has_ratings() const noexcept { return has_ratings_; }
  bool has_timestamps() const noexcept { return has_timestamps_; }
  std::size_t size() const noexcept { return interactions_.size(); }
  bool empty() const noexcept { return interactions_.empty(); }

  // Same interactions, history plus `step`. Throws bad_step on a malformed
  // step.
  Dataset with_step(ProvenanceStep step) const;

  // Result of a transformation: the given interactions, this history plus
  // `step`. When the step carries no checksum, the digest of the new state
  // is computed and recorded.
  Dataset derive(std::vector<Interaction> interactions,
                 ProvenanceStep step) const;

 private:
  friend Dataset build_dataset(std::vector<Interaction> records,
                               ProvenanceStep load_step);

  std::vector<Interaction> interactions_;
  std::vector<ProvenanceStep> history_;
  bool has_ratings_ = false;
  bool has_timestamps_ = false;
};

// Validates the records and constructs a dataset whose history is the single
// given load step (its checksum is filled in when absent).
//
// Throws empty_field when a user/item id is blank after whitespace trimming,
// mixed_schema when rating or timestamp presence differs across records, and
// parse_error for non-finite ratings.
Dataset build_dataset(std::vector<Interaction> records,
                      ProvenanceStep load_step);

// Same, with a generic in-memory load step.
Dataset build_dataset(std::vector<Interaction> records);

// Free-function form of Dataset::with_step.
Dataset append_history(const Dataset& d, ProvenanceStep step);

}  // namespace recdata

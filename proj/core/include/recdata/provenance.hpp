#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace recdata {

enum class StepCategory { load, process, split, export_ };

std::string_view to_string(StepCategory category);
std::optional<StepCategory> parse_step_category(std::string_view name);

// Scalar parameter of a recorded operation.
using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using ParamList = std::vector<std::pair<std::string, ParamValue>>;

// Canonical text form of a parameter; doubles use the shortest
// representation that round-trips.
std::string to_text(const ParamValue& value);

// Looks up a parameter by name; nullptr when missing.
const ParamValue* find_param(const ParamList& params, std::string_view name);

// Sets or replaces a parameter, preserving the position of an existing key.
void set_param(ParamList& params, std::string_view name, ParamValue value);

// True for exactly 32 lowercase hexadecimal characters (an MD5 digest).
bool is_hex_digest(std::string_view text);

// A recorded content digest: absent, a single digest, or named digests
// (train/test/val of a split, or the folds of a fold set).
class StepChecksum {
 public:
  using Named = std::vector<std::pair<std::string, std::string>>;

  StepChecksum() = default;
  StepChecksum(std::string digest) : value_(std::move(digest)) {}
  StepChecksum(Named digests) : value_(std::move(digests)) {}

  bool empty() const noexcept { return value_.index() == 0; }
  bool is_single() const noexcept { return value_.index() == 1; }
  bool is_named() const noexcept { return value_.index() == 2; }

  const std::string& single() const { return std::get<1>(value_); }
  const Named& named() const { return std::get<2>(value_); }

  bool operator==(const StepChecksum&) const = default;

 private:
  std::variant<std::monostate, std::string, Named> value_;
};

struct ProvenanceStep {
  StepCategory category = StepCategory::process;
  std::string operation;
  ParamList params;
  StepChecksum checksum;

  bool operator==(const ProvenanceStep&) const = default;
};

// Builds a validated step; throws bad_step for an unknown category name.
ProvenanceStep make_step(std::string_view category_name, std::string operation,
                         ParamList params = {}, StepChecksum checksum = {});

// Throws bad_step when a recorded digest is not 32 lowercase hex characters.
void validate_step(const ProvenanceStep& step);

}  // namespace recdata

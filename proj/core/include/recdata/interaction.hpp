#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace recdata {

// One user-item event. Ids are opaque text and are never interpreted as
// numbers; datasets routinely mix numeric and alphanumeric identifiers.
struct Interaction {
  std::string user;
  std::string item;
  std::optional<double> rating;
  std::optional<std::int64_t> timestamp;

  bool operator==(const Interaction&) const = default;
};

}  // namespace recdata

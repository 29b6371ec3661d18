#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace recdata {

// One code per failure the library contracts name.
enum class errc {
  // core
  empty_field,
  mixed_schema,
  bad_step,
  // io
  parse_error,
  io_failure,
  schema_mismatch,
  // registry
  unknown_dataset,
  unknown_version,
  checksum_mismatch,
  download_failure,
  offline_miss,
  unpinned_checksum,
  // metrics
  empty_dataset,
  all_zero,
  // processing
  no_ratings,
  no_timestamps,
  // splitting
  bad_ratio,
  too_few_interactions,
  // pipeline
  schema_error,
  unknown_operation,
  bad_params,
  // cli
  usage_error,
};

const char* errc_name(errc code);

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

// Parse failure pointing at the 1-based line of the offending row.
// line == 0 means the location is not line-addressable (e.g. a whole-document
// JSON array).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& message, std::size_t line = 0)
      : Error(errc::parse_error, message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace recdata

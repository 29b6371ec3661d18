#pragma once

#include <cstddef>
#include <optional>
#include <string>

namespace recdata {

enum class FormatKind { tabular, inline_rows, json };
enum class JsonLayout { lines, array };

std::string_view to_string(FormatKind kind);
std::optional<FormatKind> parse_format_kind(std::string_view name);

// Column positions of a tabular layout. rating/timestamp are optional; when
// infer_extra is set and both are unset, their positions are inferred once
// from the field count of the first data row (>=4 fields: rating then
// timestamp; 3 fields: rating only).
struct ColumnMap {
  std::size_t user = 0;
  std::size_t item = 1;
  std::optional<std::size_t> rating;
  std::optional<std::size_t> timestamp;
  bool infer_extra = true;
};

// Description of an on-disk layout.
struct FormatSpec {
  FormatKind kind = FormatKind::tabular;
  std::string separator = "\t";  // tabular and inline
  ColumnMap columns;             // tabular
  bool has_header = false;       // tabular
  JsonLayout json_layout = JsonLayout::lines;

  // Throws schema_error on an ill-formed spec (coinciding user/item columns,
  // empty separator, separator containing a newline).
  void validate() const;

  static FormatSpec tabular(std::string separator = "\t",
                            bool has_header = false) {
    FormatSpec spec;
    spec.kind = FormatKind::tabular;
    spec.separator = std::move(separator);
    spec.has_header = has_header;
    return spec;
  }
  static FormatSpec inline_rows(std::string separator = "\t") {
    FormatSpec spec;
    spec.kind = FormatKind::inline_rows;
    spec.separator = std::move(separator);
    return spec;
  }
  static FormatSpec json(JsonLayout layout = JsonLayout::lines) {
    FormatSpec spec;
    spec.kind = FormatKind::json;
    spec.json_layout = layout;
    return spec;
  }
};

}  // namespace recdata

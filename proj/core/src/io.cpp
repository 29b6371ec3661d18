#include "recdata/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "archive.hpp"
#include "json.hpp"
#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "text_util.hpp"

namespace recdata {

namespace {

using detail::trim;
using json = nlohmann::json;

std::optional<double> parse_double_field(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || end != field.data() + field.size()) {
    return std::nullopt;  // caller reports the line
  }
  return value;
}

std::optional<std::int64_t> parse_timestamp_field(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  std::int64_t value = 0;
  const auto [end, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec == std::errc() && end == field.data() + field.size()) return value;
  // Some sources store integral timestamps in float notation ("123.0").
  if (const auto as_double = parse_double_field(field)) {
    if (*as_double == std::trunc(*as_double) &&
        std::abs(*as_double) < 9.0e18) {
      return static_cast<std::int64_t>(*as_double);
    }
  }
  return std::nullopt;
}

[[noreturn]] void bad_row(const std::string& source, std::size_t line,
                          const std::string& what) {
  throw ParseError(source + ":" + std::to_string(line) + ": " + what, line);
}

// ---------------------------------------------------------------------------
// Tabular

struct EffectiveColumns {
  std::size_t user;
  std::size_t item;
  std::optional<std::size_t> rating;
  std::optional<std::size_t> timestamp;
  std::size_t required;  // minimum fields per row
};

EffectiveColumns resolve_columns(const ColumnMap& map,
                                 std::optional<std::size_t> first_row_fields) {
  EffectiveColumns cols{map.user, map.item, map.rating, map.timestamp, 0};
  // Inference applies only to the conventional layout, where user and item
  // occupy the first two positions.
  const bool conventional =
      (map.user == 0 && map.item == 1) || (map.user == 1 && map.item == 0);
  if (map.infer_extra && !map.rating && !map.timestamp && conventional &&
      first_row_fields) {
    if (*first_row_fields >= 4) {
      cols.rating = 2;
      cols.timestamp = 3;
    } else if (*first_row_fields == 3) {
      cols.rating = 2;
    }
  }
  cols.required = std::max(cols.user, cols.item);
  if (cols.rating) cols.required = std::max(cols.required, *cols.rating);
  if (cols.timestamp) cols.required = std::max(cols.required, *cols.timestamp);
  ++cols.required;
  return cols;
}

std::vector<Interaction> parse_tabular(std::string_view text,
                                       const FormatSpec& spec,
                                       const std::string& source) {
  std::vector<Interaction> records;
  bool header_pending = spec.has_header;
  std::optional<EffectiveColumns> cols;

  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line)) return;
    if (header_pending) {
      header_pending = false;
      return;
    }
    const auto fields = detail::split(line, spec.separator);
    if (!cols) cols = resolve_columns(spec.columns, fields.size());
    if (fields.size() < cols->required) {
      bad_row(source, line_no,
              "expected at least " + std::to_string(cols->required) +
                  " fields, got " + std::to_string(fields.size()));
    }
    Interaction r;
    r.user = std::string(trim(fields[cols->user]));
    r.item = std::string(trim(fields[cols->item]));
    if (r.user.empty() || r.item.empty()) {
      bad_row(source, line_no, "empty user or item id");
    }
    if (cols->rating) {
      const auto field = trim(fields[*cols->rating]);
      if (!field.empty()) {
        const auto value = parse_double_field(field);
        if (!value || !std::isfinite(*value)) {
          bad_row(source, line_no,
                  "malformed rating '" + std::string(field) + "'");
        }
        r.rating = value;
      }
    }
    if (cols->timestamp) {
      const auto field = trim(fields[*cols->timestamp]);
      if (!field.empty()) {
        const auto value = parse_timestamp_field(field);
        if (!value) {
          bad_row(source, line_no,
                  "malformed timestamp '" + std::string(field) + "'");
        }
        r.timestamp = value;
      }
    }
    records.push_back(std::move(r));
  });
  return records;
}

// ---------------------------------------------------------------------------
// Inline: one row per user, first field the user id, the rest their items.

std::vector<Interaction> parse_inline(std::string_view text,
                                      const FormatSpec& spec,
                                      const std::string& source) {
  std::vector<Interaction> records;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line)) return;
    const auto fields = detail::split(line, spec.separator);
    if (fields.size() < 2) {
      bad_row(source, line_no, "inline row needs a user and at least one item");
    }
    const auto user = trim(fields[0]);
    if (user.empty()) bad_row(source, line_no, "empty user id");
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto item = trim(fields[i]);
      if (item.empty()) bad_row(source, line_no, "empty item id");
      records.push_back(Interaction{std::string(user), std::string(item),
                                    std::nullopt, std::nullopt});
    }
  });
  return records;
}

// ---------------------------------------------------------------------------
// JSON: object-per-line by default; a whole-document array is accepted on
// read. Extra keys are ignored.

std::string id_from_json(const json& value, std::size_t line,
                         const std::string& source, const char* key) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number_integer()) {
    return std::to_string(value.get<std::int64_t>());
  }
  if (value.is_number_unsigned()) {
    return std::to_string(value.get<std::uint64_t>());
  }
  bad_row(source, line, std::string(key) + " must be a string or integer");
}

Interaction interaction_from_json(const json& obj, std::size_t line,
                                  const std::string& source) {
  if (!obj.is_object()) bad_row(source, line, "expected a JSON object");
  if (!obj.contains("user") || !obj.contains("item")) {
    bad_row(source, line, "object needs 'user' and 'item' keys");
  }
  Interaction r;
  r.user = id_from_json(obj.at("user"), line, source, "user");
  r.item = id_from_json(obj.at("item"), line, source, "item");
  if (const auto it = obj.find("rating"); it != obj.end() && !it->is_null()) {
    if (!it->is_number()) bad_row(source, line, "rating must be a number");
    r.rating = it->get<double>();
  }
  if (const auto it = obj.find("timestamp");
      it != obj.end() && !it->is_null()) {
    if (it->is_number_integer() || it->is_number_unsigned()) {
      r.timestamp = it->get<std::int64_t>();
    } else if (it->is_number_float()) {
      const double v = it->get<double>();
      if (v != std::trunc(v)) {
        bad_row(source, line, "timestamp must be an integer");
      }
      r.timestamp = static_cast<std::int64_t>(v);
    } else {
      bad_row(source, line, "timestamp must be an integer");
    }
  }
  if (detail::is_blank(r.user) || detail::is_blank(r.item)) {
    bad_row(source, line, "empty user or item id");
  }
  return r;
}

std::vector<Interaction> parse_json_text(std::string_view text,
                                         const std::string& source) {
  std::vector<Interaction> records;
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return records;

  if (text[first] == '[') {
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source + ": " + e.what(), 0);
    }
    std::size_t index = 0;
    for (const auto& obj : doc) {
      ++index;
      records.push_back(interaction_from_json(obj, index, source));
    }
    return records;
  }

  detail::for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (detail::is_blank(line)) return;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      bad_row(source, line_no, e.what());
    }
    records.push_back(interaction_from_json(obj, line_no, source));
  });
  return records;
}

// ---------------------------------------------------------------------------
// Writers

void check_separator_safe(const Dataset& d, const std::string& sep) {
  for (const auto& r : d.interactions()) {
    if (r.user.find(sep) != std::string::npos ||
        r.item.find(sep) != std::string::npos ||
        r.user.find('\n') != std::string::npos ||
        r.item.find('\n') != std::string::npos) {
      fail(errc::schema_mismatch,
           "id '" + r.user + "'/'" + r.item +
               "' contains the separator or a newline; pick another "
               "separator or format");
    }
  }
}

struct Rendered {
  std::string text;
  bool lossy = false;
};

Rendered render_tabular(const Dataset& d, const FormatSpec& spec) {
  const ColumnMap& map = spec.columns;
  EffectiveColumns cols{map.user, map.item, map.rating, map.timestamp, 0};
  if (map.infer_extra && !map.rating && !map.timestamp) {
    if (d.has_ratings()) cols.rating = std::max(map.user, map.item) + 1;
    if (d.has_timestamps()) {
      cols.timestamp = cols.rating ? *cols.rating + 1
                                   : std::max(map.user, map.item) + 1;
    }
  }
  if (cols.rating && !d.has_ratings()) {
    fail(errc::schema_mismatch,
         "format maps a rating column but the dataset has no ratings");
  }
  if (cols.timestamp && !d.has_timestamps()) {
    fail(errc::schema_mismatch,
         "format maps a timestamp column but the dataset has no timestamps");
  }
  check_separator_safe(d, spec.separator);

  std::size_t width = std::max(cols.user, cols.item);
  if (cols.rating) width = std::max(width, *cols.rating);
  if (cols.timestamp) width = std::max(width, *cols.timestamp);
  ++width;

  Rendered out;
  out.lossy = (d.has_ratings() && !cols.rating) ||
              (d.has_timestamps() && !cols.timestamp);

  std::vector<std::string> cells(width);
  if (spec.has_header) {
    std::fill(cells.begin(), cells.end(), std::string());
    cells[cols.user] = "user";
    cells[cols.item] = "item";
    if (cols.rating) cells[*cols.rating] = "rating";
    if (cols.timestamp) cells[*cols.timestamp] = "timestamp";
    for (std::size_t i = 0; i < width; ++i) {
      if (i) out.text += spec.separator;
      out.text += cells[i];
    }
    out.text += '\n';
  }
  for (const auto& r : d.interactions()) {
    std::fill(cells.begin(), cells.end(), std::string());
    cells[cols.user] = r.user;
    cells[cols.item] = r.item;
    if (cols.rating) cells[*cols.rating] = render_rating(*r.rating);
    if (cols.timestamp) {
      cells[*cols.timestamp] = render_timestamp(*r.timestamp);
    }
    for (std::size_t i = 0; i < width; ++i) {
      if (i) out.text += spec.separator;
      out.text += cells[i];
    }
    out.text += '\n';
  }
  return out;
}

Rendered render_inline(const Dataset& d, const FormatSpec& spec) {
  check_separator_safe(d, spec.separator);
  // First-seen user order; items keep their original interaction order.
  std::vector<const std::string*> user_order;
  std::unordered_map<std::string, std::vector<const std::string*>> items;
  for (const auto& r : d.interactions()) {
    auto [it, inserted] = items.try_emplace(r.user);
    if (inserted) user_order.push_back(&r.user);
    it->second.push_back(&r.item);
  }
  Rendered out;
  out.lossy = d.has_ratings() || d.has_timestamps();
  for (const auto* user : user_order) {
    out.text += *user;
    for (const auto* item : items[*user]) {
      out.text += spec.separator;
      out.text += *item;
    }
    out.text += '\n';
  }
  return out;
}

std::string json_object_line(const Interaction& r) {
  std::string line = "{\"user\":" + json(r.user).dump() +
                     ",\"item\":" + json(r.item).dump();
  if (r.rating) line += ",\"rating\":" + render_rating(*r.rating);
  if (r.timestamp) line += ",\"timestamp\":" + render_timestamp(*r.timestamp);
  line += "}";
  return line;
}

Rendered render_json(const Dataset& d, const FormatSpec& spec) {
  Rendered out;
  if (spec.json_layout == JsonLayout::array) {
    out.text = "[";
    bool first = true;
    for (const auto& r : d.interactions()) {
      out.text += first ? "\n" : ",\n";
      out.text += json_object_line(r);
      first = false;
    }
    out.text += d.empty() ? "]\n" : "\n]\n";
  } else {
    for (const auto& r : d.interactions()) {
      out.text += json_object_line(r);
      out.text += '\n';
    }
  }
  return out;
}

void write_atomic(const std::filesystem::path& sink, std::string_view bytes) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path dir = sink.parent_path();
  if (!dir.empty()) {
    fs::create_directories(dir, ec);  // best effort; open failure reports
  }
  fs::path tmp = sink;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      fail(errc::io_failure, "cannot open '" + tmp.string() + "' for writing");
    }
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      fail(errc::io_failure, "write failed on '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, sink, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(errc::io_failure,
         "cannot move output into place at '" + sink.string() + "'");
  }
}

const char* write_operation_name(FormatKind kind) {
  switch (kind) {
    case FormatKind::tabular:
      return "WriteTabular";
    case FormatKind::inline_rows:
      return "WriteInline";
    case FormatKind::json:
      return "WriteJson";
  }
  return "Write";
}

Rendered render(const Dataset& d, const FormatSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case FormatKind::tabular:
      return render_tabular(d, spec);
    case FormatKind::inline_rows:
      return render_inline(d, spec);
    case FormatKind::json:
      return render_json(d, spec);
  }
  fail(errc::schema_error, "unknown format kind");
}

}  // namespace

std::string_view to_string(FormatKind kind) {
  switch (kind) {
    case FormatKind::tabular:
      return "tabular";
    case FormatKind::inline_rows:
      return "inline";
    case FormatKind::json:
      return "json";
  }
  return "?";
}

std::optional<FormatKind> parse_format_kind(std::string_view name) {
  const std::string lowered = detail::to_lower(name);
  if (lowered == "tabular" || lowered == "tsv" || lowered == "csv") {
    return FormatKind::tabular;
  }
  if (lowered == "inline") return FormatKind::inline_rows;
  if (lowered == "json" || lowered == "jsonl") return FormatKind::json;
  return std::nullopt;
}

void FormatSpec::validate() const {
  if (kind != FormatKind::json) {
    if (separator.empty()) {
      fail(errc::schema_error, "separator must be non-empty");
    }
    if (separator.find('\n') != std::string::npos) {
      fail(errc::schema_error, "separator must not contain a newline");
    }
  }
  if (kind == FormatKind::tabular && columns.user == columns.item) {
    fail(errc::schema_error, "user and item columns must be distinct");
  }
}

Dataset read_dataset_text(std::string_view text, const FormatSpec& spec,
                          const std::string& source_name) {
  spec.validate();
  std::vector<Interaction> records;
  switch (spec.kind) {
    case FormatKind::tabular:
      records = parse_tabular(text, spec, source_name);
      break;
    case FormatKind::inline_rows:
      records = parse_inline(text, spec, source_name);
      break;
    case FormatKind::json:
      records = parse_json_text(text, source_name);
      break;
  }

  ParamList params;
  set_param(params, "source", source_name);
  set_param(params, "format", std::string(to_string(spec.kind)));
  if (spec.kind != FormatKind::json) set_param(params, "sep", spec.separator);
  return build_dataset(std::move(records),
                       ProvenanceStep{StepCategory::load,
                                      std::string("Read") +
                                          (spec.kind == FormatKind::tabular
                                               ? "Tabular"
                                               : spec.kind == FormatKind::json
                                                     ? "Json"
                                                     : "Inline"),
                                      std::move(params),
                                      {}});
}

Dataset read_dataset(const std::filesystem::path& source,
                     const FormatSpec& spec) {
  const std::string text = detail::read_file_maybe_gzip(source);
  return read_dataset_text(text, spec, source.string());
}

Dataset read_dataset(std::istream& source, const FormatSpec& spec,
                     const std::string& source_name) {
  std::ostringstream buffer;
  buffer << source.rdbuf();
  return read_dataset_text(buffer.str(), spec, source_name);
}

std::string write_dataset_text(const Dataset& d, const FormatSpec& spec) {
  return render(d, spec).text;
}

WriteResult write_dataset(const Dataset& d, const std::filesystem::path& sink,
                          const FormatSpec& spec) {
  const Rendered rendered = render(d, spec);
  write_atomic(sink, rendered.text);

  ParamList params;
  set_param(params, "path", sink.string());
  set_param(params, "format", std::string(to_string(spec.kind)));
  if (spec.kind != FormatKind::json) set_param(params, "sep", spec.separator);
  if (rendered.lossy) set_param(params, "lossy", true);

  WriteResult result{
      d.with_step(ProvenanceStep{StepCategory::export_,
                                 write_operation_name(spec.kind),
                                 std::move(params),
                                 StepChecksum(checksum(d))}),
      sink, md5_hex(rendered.text), rendered.lossy};
  return result;
}

}  // namespace recdata

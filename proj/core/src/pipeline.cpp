#include "recdata/pipeline.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <unordered_set>

#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "recdata/io.hpp"
#include "recdata/processing.hpp"
#include "recdata/registry.hpp"
#include "text_util.hpp"

namespace recdata {

namespace {

// ---------------------------------------------------------------------------
// Typed parameter access

[[noreturn]] void bad(const std::string& message) {
  fail(errc::bad_params, message);
}

std::optional<std::int64_t> as_int(const ParamValue& v) {
  if (std::holds_alternative<std::int64_t>(v)) {
    return std::get<std::int64_t>(v);
  }
  return std::nullopt;
}

std::optional<double> as_number(const ParamValue& v) {
  if (std::holds_alternative<std::int64_t>(v)) {
    return static_cast<double>(std::get<std::int64_t>(v));
  }
  if (std::holds_alternative<double>(v)) return std::get<double>(v);
  return std::nullopt;
}

std::int64_t get_int(const ParamList& params, std::string_view name,
                     std::optional<std::int64_t> fallback = std::nullopt) {
  if (const ParamValue* v = find_param(params, name)) {
    if (const auto i = as_int(*v)) return *i;
    bad("parameter '" + std::string(name) + "' must be an integer");
  }
  if (fallback) return *fallback;
  bad("missing required parameter '" + std::string(name) + "'");
}

double get_number(const ParamList& params, std::string_view name,
                  std::optional<double> fallback = std::nullopt) {
  if (const ParamValue* v = find_param(params, name)) {
    if (const auto n = as_number(*v)) return *n;
    bad("parameter '" + std::string(name) + "' must be a number");
  }
  if (fallback) return *fallback;
  bad("missing required parameter '" + std::string(name) + "'");
}

std::string get_text(const ParamList& params, std::string_view name,
                     std::optional<std::string> fallback = std::nullopt) {
  if (const ParamValue* v = find_param(params, name)) {
    if (std::holds_alternative<bool>(*v)) {
      bad("parameter '" + std::string(name) + "' must be text");
    }
    return to_text(*v);
  }
  if (fallback) return *fallback;
  bad("missing required parameter '" + std::string(name) + "'");
}

bool get_bool(const ParamList& params, std::string_view name, bool fallback) {
  if (const ParamValue* v = find_param(params, name)) {
    if (std::holds_alternative<bool>(*v)) return std::get<bool>(*v);
    bad("parameter '" + std::string(name) + "' must be true or false");
  }
  return fallback;
}

// Case/punctuation-insensitive enumeration value.
std::string get_flag(const ParamList& params, std::string_view name,
                     const std::vector<std::string>& allowed,
                     std::optional<std::string> fallback = std::nullopt) {
  std::string raw;
  if (const ParamValue* v = find_param(params, name)) {
    raw = to_text(*v);
  } else if (fallback) {
    return *fallback;
  } else {
    bad("missing required parameter '" + std::string(name) + "'");
  }
  const std::string key = detail::normalize_name(raw);
  for (const auto& value : allowed) {
    if (detail::normalize_name(value) == key) return value;
  }
  std::string values;
  for (const auto& value : allowed) {
    if (!values.empty()) values += "|";
    values += value;
  }
  bad("parameter '" + std::string(name) + "' must be one of " + values +
      " (got '" + raw + "')");
}

Stratify get_stratify(const ParamList& params) {
  return get_flag(params, "stratify", {"system", "user"}, "system") == "user"
             ? Stratify::user
             : Stratify::system;
}

std::uint64_t get_seed(const ParamList& params) {
  return static_cast<std::uint64_t>(get_int(params, "seed", 42));
}

// ---------------------------------------------------------------------------
// Operation table

enum class ParamType { boolean, integer, number, text };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::text;
  bool required = false;
  // Produced by execution and accepted (then ignored) on parse, so recorded
  // histories replay cleanly.
  bool annotation = false;
  std::string alias;
};

struct OperationSpec {
  StepCategory category = StepCategory::process;
  std::string name;
  std::vector<ParamSpec> params;
  std::function<void(const ParamList&)> check;  // ranges; may be empty
};

bool type_ok(ParamType type, const ParamValue& v) {
  switch (type) {
    case ParamType::boolean:
      return std::holds_alternative<bool>(v);
    case ParamType::integer:
      return as_int(v).has_value();
    case ParamType::number:
      return as_number(v).has_value();
    case ParamType::text:
      return !std::holds_alternative<bool>(v);
  }
  return false;
}

const char* type_name(ParamType type) {
  switch (type) {
    case ParamType::boolean:
      return "a boolean";
    case ParamType::integer:
      return "an integer";
    case ParamType::number:
      return "a number";
    case ParamType::text:
      return "text";
  }
  return "?";
}

ParamSpec p(std::string name, ParamType type, bool required = false,
            std::string alias = {}) {
  ParamSpec spec;
  spec.name = std::move(name);
  spec.type = type;
  spec.required = required;
  spec.alias = std::move(alias);
  return spec;
}

ParamSpec annotation(std::string name, ParamType type) {
  ParamSpec spec;
  spec.name = std::move(name);
  spec.type = type;
  spec.annotation = true;
  return spec;
}

void check_positive_int(const ParamList& params, const char* name) {
  if (const ParamValue* v = find_param(params, name)) {
    if (const auto i = as_int(*v); i && *i < 1) {
      bad(std::string("parameter '") + name + "' must be >= 1");
    }
  }
}

void check_holdout_params(const ParamList& params) {
  const double t = get_number(params, "test_ratio");
  const double v = get_number(params, "val_ratio", 0.0);
  if (!(t > 0.0 && t < 1.0 && v >= 0.0 && t + v < 1.0)) {
    bad("need 0 < test_ratio < 1, val_ratio >= 0 and test_ratio + val_ratio "
        "< 1");
  }
}

void check_test_ratio_param(const ParamList& params) {
  const double t = get_number(params, "test_ratio");
  if (!(t > 0.0 && t < 1.0)) bad("need 0 < test_ratio < 1");
}

std::vector<ParamSpec> tabular_read_params() {
  return {p("path", ParamType::text, true),
          p("sep", ParamType::text),
          p("header", ParamType::boolean),
          p("user_col", ParamType::integer),
          p("item_col", ParamType::integer),
          p("rating_col", ParamType::integer),
          p("timestamp_col", ParamType::integer)};
}

const std::vector<OperationSpec>& operation_table() {
  static const std::vector<OperationSpec> table = [] {
    std::vector<OperationSpec> ops;

    // load
    ops.push_back({StepCategory::load, "ReadTabular", tabular_read_params(),
                   nullptr});
    ops.push_back({StepCategory::load,
                   "ReadInline",
                   {p("path", ParamType::text, true), p("sep", ParamType::text)},
                   nullptr});
    ops.push_back({StepCategory::load,
                   "ReadJson",
                   {p("path", ParamType::text, true),
                    p("layout", ParamType::text)},
                   [](const ParamList& params) {
                     if (find_param(params, "layout")) {
                       get_flag(params, "layout", {"lines", "array"});
                     }
                   }});

    // process
    ops.push_back({StepCategory::process,
                   "Binarize",
                   {p("threshold", ParamType::number, true),
                    p("mode", ParamType::text)},
                   [](const ParamList& params) {
                     if (find_param(params, "mode")) {
                       get_flag(params, "mode", {"drop_below", "zero_one"});
                     }
                   }});
    const auto kcore_check = [](const ParamList& params) {
      check_positive_int(params, "cores");
      check_positive_int(params, "max_rounds");
    };
    ops.push_back({StepCategory::process,
                   "UserKCore",
                   {p("cores", ParamType::integer, true, "k")},
                   kcore_check});
    ops.push_back({StepCategory::process,
                   "ItemKCore",
                   {p("cores", ParamType::integer, true, "k")},
                   kcore_check});
    ops.push_back({StepCategory::process,
                   "UserItemIterativeKCore",
                   {p("cores", ParamType::integer, true, "k"),
                    p("max_rounds", ParamType::integer),
                    annotation("rounds", ParamType::integer),
                    annotation("fixpoint", ParamType::boolean)},
                   kcore_check});
    ops.push_back({StepCategory::process,
                   "ColdUsers",
                   {p("min_interactions", ParamType::integer, true, "k")},
                   [](const ParamList& params) {
                     check_positive_int(params, "min_interactions");
                   }});
    ops.push_back(
        {StepCategory::process,
         "FilterByRating",
         {p("kind", ParamType::text), p("value", ParamType::number, false,
                                        "threshold"),
          annotation("resolved_threshold", ParamType::number)},
         [](const ParamList& params) {
           const std::string kind = get_flag(
               params, "kind", {"fixed", "global_mean", "user_mean"}, "fixed");
           if (kind == "fixed" && !find_param(params, "value")) {
             bad("fixed rating filter needs a 'value'");
           }
         }});
    ops.push_back({StepCategory::process,
                   "FilterByTime",
                   {p("cutoff", ParamType::integer, true, "timestamp"),
                    p("keep", ParamType::text, true)},
                   [](const ParamList& params) {
                     get_flag(params, "keep", {"before", "after"});
                   }});

    // split
    ops.push_back({StepCategory::split,
                   "RandomHoldOut",
                   {p("test_ratio", ParamType::number, true),
                    p("val_ratio", ParamType::number),
                    p("seed", ParamType::integer),
                    p("stratify", ParamType::text)},
                   check_holdout_params});
    ops.push_back({StepCategory::split,
                   "TemporalHoldOut",
                   {p("test_ratio", ParamType::number, true),
                    p("stratify", ParamType::text)},
                   check_test_ratio_param});
    ops.push_back({StepCategory::split,
                   "TemporalFixedTimestamp",
                   {p("timestamp", ParamType::integer, true, "cutoff")},
                   nullptr});
    ops.push_back({StepCategory::split,
                   "TemporalBestRatio",
                   {p("test_ratio", ParamType::number, true),
                    annotation("cutoff", ParamType::integer)},
                   check_test_ratio_param});
    const auto leave_check = [](const ParamList& params) {
      check_positive_int(params, "n");
      if (find_param(params, "order")) {
        get_flag(params, "order", {"temporal", "random"});
      }
    };
    ops.push_back({StepCategory::split,
                   "LeaveNOut",
                   {p("n", ParamType::integer, true),
                    p("order", ParamType::text),
                    p("seed", ParamType::integer)},
                   leave_check});
    ops.push_back({StepCategory::split,
                   "LeaveNIn",
                   {p("n", ParamType::integer, true),
                    p("order", ParamType::text),
                    p("seed", ParamType::integer)},
                   leave_check});
    ops.push_back({StepCategory::split,
                   "KRepeatedHoldOut",
                   {p("repetitions", ParamType::integer, true, "k"),
                    p("test_ratio", ParamType::number, true),
                    p("seed", ParamType::integer),
                    p("stratify", ParamType::text)},
                   [](const ParamList& params) {
                     check_positive_int(params, "repetitions");
                     check_test_ratio_param(params);
                   }});
    ops.push_back({StepCategory::split,
                   "CrossValidation",
                   {p("folds", ParamType::integer, true, "k"),
                    p("seed", ParamType::integer),
                    p("stratify", ParamType::text)},
                   [](const ParamList& params) {
                     if (get_int(params, "folds") < 2) {
                       bad("cross-validation needs folds >= 2");
                     }
                   }});
    {
      auto params = tabular_read_params();
      params.erase(params.begin());  // no single 'path'
      params.insert(params.begin(),
                    {p("train_path", ParamType::text, true),
                     p("test_path", ParamType::text, true),
                     p("val_path", ParamType::text),
                     p("format", ParamType::text)});
      params.push_back(annotation("overlapping", ParamType::boolean));
      ops.push_back({StepCategory::split, "PrecomputedSplit", std::move(params),
                     [](const ParamList& list) {
                       if (find_param(list, "format")) {
                         get_flag(list, "format",
                                  {"tabular", "inline", "json"});
                       }
                     }});
    }

    // export
    for (const auto& profile : builtin_export_profiles()) {
      ops.push_back({StepCategory::export_,
                     profile.framework,
                     {p("output_path", ParamType::text, true)},
                     nullptr});
    }
    ops.push_back({StepCategory::export_,
                   "WriteTabular",
                   {p("path", ParamType::text, true),
                    p("sep", ParamType::text),
                    p("header", ParamType::boolean),
                    annotation("lossy", ParamType::boolean)},
                   nullptr});
    ops.push_back({StepCategory::export_,
                   "WriteInline",
                   {p("path", ParamType::text, true),
                    p("sep", ParamType::text),
                    annotation("lossy", ParamType::boolean)},
                   nullptr});
    ops.push_back({StepCategory::export_,
                   "WriteJson",
                   {p("path", ParamType::text, true),
                    p("layout", ParamType::text),
                    annotation("lossy", ParamType::boolean)},
                   nullptr});
    return ops;
  }();
  return table;
}

const OperationSpec* find_operation(StepCategory category,
                                    std::string_view name) {
  const std::string key = detail::normalize_name(name);
  for (const auto& op : operation_table()) {
    if (op.category == category && detail::normalize_name(op.name) == key) {
      return &op;
    }
  }
  return nullptr;
}

// Load steps that are not ReadX are dataset names resolved against the
// active catalog at execution time, so their existence cannot be settled at
// parse time; they accept a single optional 'version' parameter.
const OperationSpec& dataset_load_spec() {
  static const OperationSpec spec{
      StepCategory::load, "", {p("version", ParamType::text)}, nullptr};
  return spec;
}

// Validates names, types, requiredness and ranges; rewrites alias keys to
// their primary spelling in place.
void validate_params(const OperationSpec& op, ParamList& params) {
  std::unordered_set<std::string> seen;
  for (auto& [key, value] : params) {
    const ParamSpec* matched = nullptr;
    for (const auto& spec : op.params) {
      if (key == spec.name || (!spec.alias.empty() && key == spec.alias)) {
        matched = &spec;
        break;
      }
    }
    if (!matched) {
      bad("unknown parameter '" + key + "'");
    }
    key = matched->name;
    if (!seen.insert(key).second) {
      bad("duplicate parameter '" + key + "'");
    }
    if (!type_ok(matched->type, value)) {
      bad("parameter '" + key + "' must be " + type_name(matched->type));
    }
  }
  for (const auto& spec : op.params) {
    if (spec.required && !find_param(params, spec.name)) {
      bad("missing required parameter '" + spec.name + "'");
    }
  }
  if (op.check) op.check(params);
}

const OperationSpec& resolve_operation(StepCategory category,
                                       const std::string& operation) {
  if (const OperationSpec* op = find_operation(category, operation)) {
    return *op;
  }
  if (category == StepCategory::load) return dataset_load_spec();
  fail(errc::unknown_operation,
       "unknown " + std::string(to_string(category)) + " operation '" +
           operation + "'");
}

// ---------------------------------------------------------------------------
// Parsing

ParamValue param_from_node(const YAML::Node& node) {
  if (!node.IsScalar()) {
    fail(errc::schema_error, "parameter values must be scalars");
  }
  if (node.Tag() == "!") return node.Scalar();  // quoted: always text
  return param_from_text(node.Scalar());
}

StepChecksum checksum_from_node(const YAML::Node& node,
                                const std::string& where) {
  if (!node || node.IsNull()) return {};
  if (node.IsScalar()) {
    const std::string digest = node.Scalar();
    if (!is_hex_digest(digest)) {
      fail(errc::schema_error,
           where + ": checksum must be 32 lowercase hex characters");
    }
    return StepChecksum(digest);
  }
  if (node.IsMap()) {
    StepChecksum::Named named;
    for (const auto& entry : node) {
      const std::string key = entry.first.as<std::string>();
      if (!entry.second.IsScalar() || !is_hex_digest(entry.second.Scalar())) {
        fail(errc::schema_error, where + ": checksum '" + key +
                                     "' must be 32 lowercase hex characters");
      }
      named.emplace_back(key, entry.second.Scalar());
    }
    return StepChecksum(std::move(named));
  }
  fail(errc::schema_error, where + ": checksum must be a digest or a map of "
                                   "digests");
}

bool is_profile_export(const std::string& operation) {
  return find_export_profile(operation) != nullptr;
}

void check_structure(const PipelineConfig& config) {
  const auto& steps = config.steps;
  if (steps.empty()) {
    fail(errc::schema_error, "pipeline has no steps");
  }
  if (steps.front().category != StepCategory::load) {
    fail(errc::schema_error, "step 1: the first step must have name 'load'");
  }
  std::optional<std::size_t> split_index;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& step = steps[i];
    const std::string where = "step " + std::to_string(i + 1);
    switch (step.category) {
      case StepCategory::load:
        if (i != 0) {
          fail(errc::schema_error,
               where + ": only the first step may be a load step");
        }
        break;
      case StepCategory::split:
        if (split_index) {
          fail(errc::schema_error, where + ": at most one split step");
        }
        split_index = i;
        break;
      case StepCategory::process:
        if (split_index) {
          fail(errc::schema_error,
               where + ": process steps must come before the split step");
        }
        break;
      case StepCategory::export_:
        if (is_profile_export(step.operation)) {
          if (!split_index || i < *split_index) {
            fail(errc::schema_error,
                 where + ": " + step.operation +
                     " exports a split and must come after the split step");
          }
        } else if (split_index) {
          fail(errc::schema_error,
               where + ": file writes apply to split-less pipelines; use a "
                       "framework export after a split");
        }
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Emission

bool plain_scalar_safe(const std::string& text) {
  if (text.empty()) return false;
  static constexpr std::string_view safe =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789"
      "_./:+@-";
  for (char c : text) {
    if (safe.find(c) == std::string_view::npos) return false;
  }
  static constexpr std::string_view bad_first = "-@:";
  if (bad_first.find(text.front()) != std::string_view::npos) return false;
  // Would re-sniff as a different type.
  const ParamValue sniffed = param_from_text(text);
  return std::holds_alternative<std::string>(sniffed);
}

std::string quote_scalar(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '"':
        out += "\\\"";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  out += '"';
  return out;
}

std::string emit_scalar(const ParamValue& value) {
  if (std::holds_alternative<double>(value)) {
    const double v = std::get<double>(value);
    // Keep the value a YAML float so the type survives a round-trip.
    if (std::isfinite(v) && v == std::trunc(v) && std::abs(v) < 9.0e15) {
      return std::to_string(static_cast<long long>(v)) + ".0";
    }
    return render_double(v);
  }
  if (std::holds_alternative<std::string>(value)) {
    const std::string& text = std::get<std::string>(value);
    return plain_scalar_safe(text) ? text : quote_scalar(text);
  }
  return to_text(value);
}

// ---------------------------------------------------------------------------
// Execution

struct ExecState {
  std::optional<Dataset> dataset;
  std::optional<SplitResult> split;
  std::optional<FoldSet> folds;
};

std::filesystem::path resolve_path(const IoContext& ctx,
                                   const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || ctx.base_dir.empty()) return p;
  return ctx.base_dir / p;
}

FormatSpec format_from_params(const ParamList& params,
                              FormatKind default_kind) {
  FormatSpec spec;
  spec.kind = default_kind;
  if (find_param(params, "format")) {
    spec.kind = *parse_format_kind(get_flag(
        params, "format", {"tabular", "inline", "json"}, "tabular"));
  }
  spec.separator = get_text(params, "sep", std::string("\t"));
  spec.has_header = get_bool(params, "header", false);
  spec.columns.user = static_cast<std::size_t>(get_int(params, "user_col", 0));
  spec.columns.item = static_cast<std::size_t>(get_int(params, "item_col", 1));
  if (find_param(params, "rating_col")) {
    spec.columns.rating =
        static_cast<std::size_t>(get_int(params, "rating_col"));
    spec.columns.infer_extra = false;
  }
  if (find_param(params, "timestamp_col")) {
    spec.columns.timestamp =
        static_cast<std::size_t>(get_int(params, "timestamp_col"));
    spec.columns.infer_extra = false;
  }
  if (find_param(params, "layout") &&
      get_flag(params, "layout", {"lines", "array"}, "lines") == "array") {
    spec.json_layout = JsonLayout::array;
  }
  return spec;
}

Dataset run_load(const PipelineStep& step, const IoContext& ctx) {
  if (const auto it = ctx.source_overrides.find(step.operation);
      it != ctx.source_overrides.end()) {
    return read_dataset(it->second.path, it->second.format);
  }

  const std::string key = detail::normalize_name(step.operation);
  if (key == "readtabular") {
    return read_dataset(resolve_path(ctx, get_text(step.params, "path")),
                        format_from_params(step.params, FormatKind::tabular));
  }
  if (key == "readinline") {
    FormatSpec spec = FormatSpec::inline_rows(
        get_text(step.params, "sep", std::string("\t")));
    return read_dataset(resolve_path(ctx, get_text(step.params, "path")), spec);
  }
  if (key == "readjson") {
    return read_dataset(resolve_path(ctx, get_text(step.params, "path")),
                        format_from_params(step.params, FormatKind::json));
  }

  // A dataset name from the catalog.
  const Registry local = ctx.catalog_path
                             ? Registry::from_file(*ctx.catalog_path)
                             : Registry();
  const Registry& registry =
      ctx.catalog_path ? local : Registry::builtin();

  std::string version = get_text(step.params, "version", std::string());
  if (version.empty()) {
    const auto versions = registry.versions_of(step.operation);
    if (versions.size() == 1) {
      version = versions.front()->version;
    } else if (versions.empty()) {
      fail(errc::unknown_dataset,
           "unknown dataset '" + step.operation + "'");
    } else {
      fail(errc::unknown_version,
           "dataset '" + step.operation + "' needs an explicit version");
    }
  }
  const DatasetDescriptor& desc = registry.resolve(step.operation, version);

  FetchOptions options;
  options.cache_dir = ctx.cache_dir;
  options.offline = ctx.offline;
  return fetch_and_load(desc, options);
}

StepChecksum state_checksum(const ExecState& state) {
  if (state.dataset) return StepChecksum(checksum(*state.dataset));
  if (state.split) return StepChecksum(state.split->checksums);
  if (state.folds) {
    StepChecksum::Named named;
    for (std::size_t i = 0; i < state.folds->folds.size(); ++i) {
      for (const auto& [role, digest] : state.folds->folds[i].checksums) {
        named.emplace_back("fold_" + std::to_string(i) + "." + role, digest);
      }
    }
    return StepChecksum(std::move(named));
  }
  return {};
}

bool digests_equal(const StepChecksum& a, const StepChecksum& b) {
  if (a.is_single() && b.is_single()) return a.single() == b.single();
  if (a.is_named() && b.is_named()) {
    std::map<std::string, std::string> ma(a.named().begin(), a.named().end());
    std::map<std::string, std::string> mb(b.named().begin(), b.named().end());
    return ma == mb;
  }
  return a.empty() && b.empty();
}

// Copies the declared annotation params of `op` from a provenance step
// produced by execution into the recorded pipeline step.
void merge_annotations(const OperationSpec& op, const ProvenanceStep& source,
                       PipelineStep& target) {
  for (const auto& spec : op.params) {
    if (!spec.annotation) continue;
    if (const ParamValue* v = find_param(source.params, spec.name)) {
      set_param(target.params, spec.name, *v);
    }
  }
}

void run_export(ExecState& state, PipelineStep& step, const IoContext& ctx,
                PipelineResult& result) {
  const std::string key = detail::normalize_name(step.operation);
  if (key == "writetabular" || key == "writeinline" || key == "writejson") {
    if (!state.dataset) {
      fail(errc::schema_error, "file write needs a single dataset state");
    }
    const FormatKind kind = key == "writetabular" ? FormatKind::tabular
                            : key == "writeinline" ? FormatKind::inline_rows
                                                   : FormatKind::json;
    FormatSpec spec = format_from_params(step.params, kind);
    spec.kind = kind;
    WriteResult written = write_dataset(
        *state.dataset, resolve_path(ctx, get_text(step.params, "path")), spec);
    if (written.lossy) set_param(step.params, "lossy", true);
    state.dataset = std::move(written.dataset);
    return;
  }

  const ExportProfile* profile = find_export_profile(step.operation);
  if (!profile || (!state.split && !state.folds)) {
    fail(errc::schema_error,
         "framework export needs a split state and a known profile");
  }
  const auto out_dir = resolve_path(ctx, get_text(step.params, "output_path"));
  if (state.split) {
    ExportOutcome outcome =
        export_split(state.split->train, state.split->test, state.split->val,
                     *profile, out_dir);
    result.manifests.push_back(outcome.manifest);
    state.split->train = std::move(outcome.train);
    state.split->test = std::move(outcome.test);
    state.split->val = std::move(outcome.val);
    return;
  }
  // Fold sets export one subdirectory per fold.
  for (std::size_t i = 0; i < state.folds->folds.size(); ++i) {
    auto& fold = state.folds->folds[i];
    ExportOutcome outcome =
        export_split(fold.train, fold.test, fold.val, *profile,
                     out_dir / ("fold_" + std::to_string(i)));
    result.manifests.push_back(outcome.manifest);
    fold.train = std::move(outcome.train);
    fold.test = std::move(outcome.test);
    fold.val = std::move(outcome.val);
  }
}

}  // namespace

// ---------------------------------------------------------------------------

ParamValue param_from_text(std::string_view text) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (!text.empty()) {
    static constexpr std::string_view numeric_lead = "-0123456789.";
    if (numeric_lead.find(text.front()) != std::string_view::npos) {
      {
        std::int64_t value = 0;
        const auto [end, ec] =
            std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc() && end == text.data() + text.size()) {
          return value;
        }
      }
      static constexpr std::string_view numeric_chars = "+-.eE0123456789";
      const bool numeric_only =
          text.find_first_not_of(numeric_chars) == std::string_view::npos;
      if (numeric_only) {
        double value = 0.0;
        const auto [end, ec] =
            std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc() && end == text.data() + text.size()) {
          return value;
        }
      }
    }
  }
  return std::string(text);
}

void validate_operation(StepCategory category, const std::string& operation,
                        const ParamList& params) {
  const OperationSpec& op = resolve_operation(category, operation);
  ParamList copy = params;
  validate_params(op, copy);
}

PipelineConfig parse_config(std::string_view yaml_text) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml_text));
  } catch (const YAML::Exception& e) {
    fail(errc::schema_error, std::string("invalid YAML: ") + e.what());
  }
  if (!doc.IsMap()) {
    fail(errc::schema_error, "expected a map with a 'pipeline' list");
  }
  for (const auto& entry : doc) {
    const auto key = entry.first.as<std::string>();
    if (key != "pipeline") {
      fail(errc::schema_error, "unknown top-level key '" + key + "'");
    }
  }
  const YAML::Node pipeline = doc["pipeline"];
  if (!pipeline || !pipeline.IsSequence()) {
    fail(errc::schema_error, "'pipeline' must be a list of steps");
  }

  PipelineConfig config;
  std::size_t index = 0;
  for (const auto& node : pipeline) {
    ++index;
    const std::string where = "step " + std::to_string(index);
    if (!node.IsMap()) {
      fail(errc::schema_error, where + ": each step must be a map");
    }
    PipelineStep step;
    for (const auto& entry : node) {
      const auto key = entry.first.as<std::string>();
      if (key != "name" && key != "operation" && key != "params" &&
          key != "checksum") {
        fail(errc::schema_error, where + ": unknown key '" + key + "'");
      }
    }
    if (!node["name"] || !node["name"].IsScalar()) {
      fail(errc::schema_error, where + ": missing 'name'");
    }
    const auto category = parse_step_category(node["name"].Scalar());
    if (!category) {
      fail(errc::schema_error,
           where + ": name '" + node["name"].Scalar() +
               "' is not one of load|process|split|export");
    }
    step.category = *category;
    if (!node["operation"] || !node["operation"].IsScalar() ||
        node["operation"].Scalar().empty()) {
      fail(errc::schema_error, where + ": missing 'operation'");
    }
    step.operation = node["operation"].Scalar();
    if (const YAML::Node params = node["params"]) {
      if (!params.IsMap()) {
        fail(errc::schema_error, where + ": 'params' must be a map");
      }
      for (const auto& entry : params) {
        try {
          step.params.emplace_back(entry.first.as<std::string>(),
                                   param_from_node(entry.second));
        } catch (const Error& e) {
          fail(errc::schema_error, where + ": " + e.what());
        }
      }
    }
    step.checksum = checksum_from_node(node["checksum"], where);

    try {
      const OperationSpec& op =
          resolve_operation(step.category, step.operation);
      validate_params(op, step.params);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    config.steps.push_back(std::move(step));
  }

  check_structure(config);
  return config;
}

std::string write_config(const PipelineConfig& config) {
  std::string out = "pipeline:\n";
  for (const auto& step : config.steps) {
    out += "- name: ";
    out += to_string(step.category);
    out += "\n  operation: ";
    out += step.operation;
    out += '\n';
    if (!step.params.empty()) {
      out += "  params:\n";
      for (const auto& [key, value] : step.params) {
        out += "    " + key + ": " + emit_scalar(value) + "\n";
      }
    }
    if (step.checksum.is_single()) {
      out += "  checksum: " + step.checksum.single() + "\n";
    } else if (step.checksum.is_named()) {
      out += "  checksum:\n";
      for (const auto& [name, digest] : step.checksum.named()) {
        out += "    " + name + ": " + digest + "\n";
      }
    }
  }
  return out;
}

Dataset apply_process_operation(const Dataset& d, const std::string& operation,
                                const ParamList& params) {
  const std::string key = detail::normalize_name(operation);
  if (key == "binarize") {
    const auto mode =
        get_flag(params, "mode", {"drop_below", "zero_one"}, "drop_below");
    return binarize(d, get_number(params, "threshold"),
                    mode == "zero_one" ? BinarizeMode::zero_one
                                       : BinarizeMode::drop_below);
  }
  if (key == "userkcore" || key == "itemkcore" ||
      key == "useritemiterativekcore") {
    const auto k = static_cast<std::size_t>(get_int(params, "cores"));
    if (key == "userkcore") return kcore(d, k, KCoreMode::user);
    if (key == "itemkcore") return kcore(d, k, KCoreMode::item);
    std::optional<std::size_t> max_rounds;
    if (find_param(params, "max_rounds")) {
      max_rounds = static_cast<std::size_t>(get_int(params, "max_rounds"));
    }
    return kcore(d, k, KCoreMode::iterative, max_rounds);
  }
  if (key == "coldusers") {
    return drop_cold_users(
        d, static_cast<std::size_t>(get_int(params, "min_interactions")));
  }
  if (key == "filterbyrating") {
    const std::string kind =
        get_flag(params, "kind", {"fixed", "global_mean", "user_mean"},
                 "fixed");
    RatingThreshold threshold;
    if (kind == "fixed") {
      threshold = RatingThreshold::fixed(get_number(params, "value"));
    } else if (kind == "global_mean") {
      threshold = RatingThreshold::global_mean();
    } else {
      threshold = RatingThreshold::user_mean();
    }
    return filter_by_rating(d, threshold);
  }
  if (key == "filterbytime") {
    return filter_by_time(d, get_int(params, "cutoff"),
                          get_flag(params, "keep", {"before", "after"}) ==
                                  "before"
                              ? TimeKeep::before
                              : TimeKeep::after);
  }
  fail(errc::unknown_operation, "unknown process operation '" + operation + "'");
}

SplitOutcome apply_split_operation(const Dataset& d,
                                   const std::string& operation,
                                   const ParamList& params,
                                   const IoContext& ctx) {
  const std::string key = detail::normalize_name(operation);
  SplitOutcome outcome;
  if (key == "randomholdout") {
    outcome.split = random_holdout(d, get_number(params, "test_ratio"),
                                   get_number(params, "val_ratio", 0.0),
                                   get_seed(params), get_stratify(params));
  } else if (key == "temporalholdout") {
    outcome.split = temporal_split(
        d, TemporalMode::by_ratio(get_number(params, "test_ratio"),
                                  get_stratify(params)));
  } else if (key == "temporalfixedtimestamp") {
    outcome.split =
        temporal_split(d, TemporalMode::fixed(get_int(params, "timestamp")));
  } else if (key == "temporalbestratio") {
    outcome.split = temporal_split(
        d, TemporalMode::best_ratio(get_number(params, "test_ratio")));
  } else if (key == "leavenout" || key == "leavenin") {
    const auto n = static_cast<std::size_t>(get_int(params, "n"));
    const auto order_kind =
        get_flag(params, "order", {"temporal", "random"}, "temporal");
    const LeaveOrder order = order_kind == "temporal"
                                 ? LeaveOrder::temporal()
                                 : LeaveOrder::random(get_seed(params));
    outcome.split = leave_n_split(d, n,
                                  key == "leavenout" ? LeaveDirection::out
                                                     : LeaveDirection::in,
                                  order);
  } else if (key == "krepeatedholdout") {
    outcome.folds = k_repeated_holdout(
        d, static_cast<std::size_t>(get_int(params, "repetitions")),
        get_number(params, "test_ratio"), get_seed(params),
        get_stratify(params));
  } else if (key == "crossvalidation") {
    outcome.folds =
        cross_validation(d, static_cast<std::size_t>(get_int(params, "folds")),
                         get_seed(params), get_stratify(params));
  } else if (key == "precomputedsplit") {
    const FormatSpec spec = format_from_params(params, FormatKind::tabular);
    std::optional<std::filesystem::path> val_path;
    if (find_param(params, "val_path")) {
      val_path = resolve_path(ctx, get_text(params, "val_path"));
    }
    outcome.split = precomputed_split(
        resolve_path(ctx, get_text(params, "train_path")),
        resolve_path(ctx, get_text(params, "test_path")), val_path, spec);
  } else {
    fail(errc::unknown_operation,
         "unknown split operation '" + operation + "'");
  }
  return outcome;
}

bool PipelineResult::all_match() const {
  return std::all_of(steps.begin(), steps.end(),
                     [](const StepOutcome& s) { return s.matched; });
}

std::vector<std::size_t> PipelineResult::mismatches() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!steps[i].matched) out.push_back(i);
  }
  return out;
}

PipelineResult execute(const PipelineConfig& config, RunMode mode,
                       const IoContext& ctx) {
  PipelineResult result;
  ExecState state;

  for (std::size_t i = 0; i < config.steps.size(); ++i) {
    const PipelineStep& step = config.steps[i];
    PipelineStep executed = step;
    executed.checksum = {};
    const OperationSpec& op = resolve_operation(step.category, step.operation);

    try {
      switch (step.category) {
        case StepCategory::load:
          state.dataset = run_load(step, ctx);
          break;
        case StepCategory::process: {
          if (!state.dataset) {
            fail(errc::schema_error, "no dataset state to process");
          }
          state.dataset =
              apply_process_operation(*state.dataset, step.operation,
                                      step.params);
          merge_annotations(op, state.dataset->history().back(), executed);
          break;
        }
        case StepCategory::split: {
          if (!state.dataset) {
            fail(errc::schema_error, "no dataset state to split");
          }
          SplitOutcome outcome = apply_split_operation(
              *state.dataset, step.operation, step.params, ctx);
          if (outcome.split) {
            merge_annotations(op, outcome.split->train.history().back(),
                              executed);
            state.split = std::move(outcome.split);
          } else {
            state.folds = std::move(outcome.folds);
          }
          state.dataset.reset();
          break;
        }
        case StepCategory::export_:
          run_export(state, executed, ctx, result);
          break;
      }
    } catch (const Error& e) {
      throw Error(e.code(), "step " + std::to_string(i + 1) + " (" +
                                step.operation + "): " + e.what());
    }

    executed.checksum = state_checksum(state);

    StepOutcome outcome;
    outcome.step = std::move(executed);
    outcome.expected = step.checksum;
    outcome.had_expected = !step.checksum.empty();
    if (mode == RunMode::verify && outcome.had_expected) {
      outcome.matched = digests_equal(outcome.step.checksum, outcome.expected);
    }
    result.steps.push_back(std::move(outcome));
  }

  result.dataset = std::move(state.dataset);
  result.split = std::move(state.split);
  result.folds = std::move(state.folds);
  return result;
}

std::string export_history(const PipelineResult& result) {
  PipelineConfig config;
  config.steps.reserve(result.steps.size());
  for (const auto& outcome : result.steps) {
    config.steps.push_back(outcome.step);
  }
  return write_config(config);
}

}  // namespace recdata

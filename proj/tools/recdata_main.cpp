// recdata command-line tool.
//
// Exit codes: 0 success, 1 operational error, 2 usage error, 3 replay
// verification mismatch. Data and reports go to stdout, diagnostics to
// stderr, so scripts can parse the output and CI can gate on code 3.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "recdata/checksum.hpp"
#include "recdata/dataset.hpp"
#include "recdata/errors.hpp"
#include "recdata/export.hpp"
#include "recdata/io.hpp"
#include "recdata/metrics.hpp"
#include "recdata/pipeline.hpp"
#include "recdata/registry.hpp"

namespace {

using namespace recdata;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitMismatch = 3;

// "\t" and friends typed in a shell arrive as two characters.
std::string unescape_separator(std::string s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      switch (s[i + 1]) {
        case 't':
          out += '\t';
          ++i;
          continue;
        case 'n':
          out += '\n';
          ++i;
          continue;
        case '\\':
          out += '\\';
          ++i;
          continue;
        default:
          break;
      }
    }
    out += s[i];
  }
  return out;
}

struct FormatFlags {
  std::string format = "tabular";
  std::string sep = "\t";
  bool header = false;
  std::int64_t user_col = 0;
  std::int64_t item_col = 1;
  std::int64_t rating_col = -1;
  std::int64_t timestamp_col = -1;
  std::string json_layout = "lines";

  FormatSpec to_spec() const {
    FormatSpec spec;
    const auto kind = parse_format_kind(format);
    if (!kind) fail(errc::usage_error, "unknown format '" + format + "'");
    spec.kind = *kind;
    spec.separator = unescape_separator(sep);
    spec.has_header = header;
    spec.columns.user = static_cast<std::size_t>(user_col);
    spec.columns.item = static_cast<std::size_t>(item_col);
    if (rating_col >= 0) {
      spec.columns.rating = static_cast<std::size_t>(rating_col);
      spec.columns.infer_extra = false;
    }
    if (timestamp_col >= 0) {
      spec.columns.timestamp = static_cast<std::size_t>(timestamp_col);
      spec.columns.infer_extra = false;
    }
    if (json_layout == "array") spec.json_layout = JsonLayout::array;
    spec.validate();
    return spec;
  }
};

void add_format_flags(CLI::App* cmd, FormatFlags& flags,
                      const std::string& prefix = "") {
  const std::string dash = "--" + prefix;
  cmd->add_option(dash + "format", flags.format,
                  "Input format: tabular|inline|json")
      ->default_str(flags.format);
  cmd->add_option(dash + "sep", flags.sep, "Field separator (\\t escapes ok)")
      ->default_str("\\t");
  cmd->add_flag(dash + "header", flags.header, "First line is a header");
  cmd->add_option(dash + "user-col", flags.user_col, "User column position");
  cmd->add_option(dash + "item-col", flags.item_col, "Item column position");
  cmd->add_option(dash + "rating-col", flags.rating_col,
                  "Rating column position (default: inferred)");
  cmd->add_option(dash + "timestamp-col", flags.timestamp_col,
                  "Timestamp column position (default: inferred)");
  cmd->add_option(dash + "json-layout", flags.json_layout,
                  "JSON layout: lines|array");
}

ParamList parse_cli_params(const std::vector<std::string>& pairs) {
  ParamList params;
  for (const auto& pair : pairs) {
    const auto eq = pair.find('=');
    if (eq == std::string::npos || eq == 0) {
      fail(errc::usage_error, "--param expects key=value, got '" + pair + "'");
    }
    params.emplace_back(pair.substr(0, eq),
                        param_from_text(pair.substr(eq + 1)));
  }
  return params;
}

void print_report_text(const MetricsReport& r) {
  auto row = [](const std::string& name, const std::string& value) {
    std::cout << name;
    for (std::size_t i = name.size(); i < 22; ++i) std::cout << ' ';
    std::cout << value << "\n";
  };
  row("users", std::to_string(r.n_users));
  row("items", std::to_string(r.n_items));
  row("interactions", std::to_string(r.n_interactions));
  row("space_size", render_double(r.space_size));
  row("shape", render_double(r.shape));
  row("density", render_double(r.density));
  row("gini_users", render_double(r.gini_users));
  row("gini_items", render_double(r.gini_items));
  row("mean_profile_user", render_double(r.mean_profile_user));
  row("mean_profile_item", render_double(r.mean_profile_item));
  if (r.mean_rating_user) {
    row("mean_rating_user", render_double(*r.mean_rating_user));
    row("mean_rating_item", render_double(*r.mean_rating_item));
  }
}

void print_report_json(const MetricsReport& r) {
  nlohmann::ordered_json out;
  out["users"] = r.n_users;
  out["items"] = r.n_items;
  out["interactions"] = r.n_interactions;
  out["space_size"] = r.space_size;
  out["shape"] = r.shape;
  out["density"] = r.density;
  out["gini_users"] = r.gini_users;
  out["gini_items"] = r.gini_items;
  out["mean_profile_user"] = r.mean_profile_user;
  out["mean_profile_item"] = r.mean_profile_item;
  if (r.mean_rating_user) {
    out["mean_rating_user"] = *r.mean_rating_user;
    out["mean_rating_item"] = *r.mean_rating_item;
  }
  std::cout << out.dump(2) << "\n";
}

std::string step_label(std::size_t index, const PipelineStep& step) {
  return "step " + std::to_string(index + 1) + " " +
         std::string(to_string(step.category)) + " " + step.operation;
}

int run_pipeline(const std::string& config_path, bool verify,
                 const std::string& emit_path, IoContext& ctx) {
  std::ifstream in(config_path);
  if (!in) fail(errc::io_failure, "cannot open '" + config_path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  const PipelineConfig config = parse_config(text);

  const PipelineResult result =
      execute(config, verify ? RunMode::verify : RunMode::record, ctx);

  if (verify) {
    for (std::size_t i = 0; i < result.steps.size(); ++i) {
      const auto& outcome = result.steps[i];
      std::cout << step_label(i, outcome.step) << ": ";
      if (!outcome.had_expected) {
        std::cout << "unchecked (no recorded checksum)\n";
      } else if (outcome.matched) {
        std::cout << "match\n";
      } else {
        std::cout << "MISMATCH\n";
      }
    }
    const auto bad_steps = result.mismatches();
    if (bad_steps.empty()) {
      std::cout << "verification: all-match\n";
      return kExitOk;
    }
    std::cout << "verification: " << bad_steps.size() << " mismatch"
              << (bad_steps.size() == 1 ? "" : "es") << "\n";
    return kExitMismatch;
  }

  const std::string history = export_history(result);
  if (emit_path.empty() || emit_path == "-") {
    std::cout << history;
  } else {
    std::ofstream out(emit_path, std::ios::trunc);
    if (!out) fail(errc::io_failure, "cannot write '" + emit_path + "'");
    out << history;
    std::cerr << "recorded history written to " << emit_path << "\n";
  }
  return kExitOk;
}

int main_impl(int argc, char** argv) {
  CLI::App app{"Reproducible management of recommendation datasets"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::simple);

  // --- run -------------------------------------------------------------
  auto* run = app.add_subcommand(
      "run", "Execute a pipeline document (record or verify mode)");
  std::string run_config;
  bool run_verify = false;
  std::string run_emit;
  std::string run_base_dir = ".";
  std::string run_cache_dir;
  std::string run_catalog;
  bool run_offline = false;
  std::string override_path;
  FormatFlags override_format;
  run->add_option("config", run_config, "Pipeline YAML document")->required();
  run->add_flag("--verify", run_verify,
                "Compare recorded checksums instead of emitting them");
  run->add_option("--emit", run_emit,
                  "Write the recorded history here (default: stdout)");
  run->add_option("--base-dir", run_base_dir,
                  "Directory relative paths resolve against");
  run->add_option("--cache-dir", run_cache_dir, "Dataset cache directory");
  run->add_option("--catalog", run_catalog, "Dataset catalog file");
  run->add_flag("--offline", run_offline, "Never touch the network");
  run->add_option("--load-source", override_path,
                  "Replace the load step's data source with this file");
  add_format_flags(run, override_format, "load-");

  // --- stats -----------------------------------------------------------
  auto* stats = app.add_subcommand("stats", "Dataset characterization metrics");
  std::string stats_input;
  FormatFlags stats_format;
  bool stats_json = false;
  stats->add_option("input", stats_input, "Dataset file")->required();
  add_format_flags(stats, stats_format);
  stats->add_flag("--json", stats_json, "Emit JSON instead of aligned text");

  // --- checksum ----------------------------------------------------------
  auto* sum = app.add_subcommand(
      "checksum", "Content checksum of a dataset (canonical form)");
  std::string sum_input;
  FormatFlags sum_format;
  sum->add_option("input", sum_input, "Dataset file")->required();
  add_format_flags(sum, sum_format);

  // --- convert -----------------------------------------------------------
  auto* convert = app.add_subcommand("convert", "Convert between formats");
  std::string convert_in, convert_out;
  FormatFlags convert_from, convert_to;
  convert->add_option("input", convert_in, "Input file")->required();
  convert->add_option("output", convert_out, "Output file")->required();
  add_format_flags(convert, convert_from, "from-");
  add_format_flags(convert, convert_to, "to-");

  // --- process -----------------------------------------------------------
  auto* process = app.add_subcommand("process", "Apply one transformation");
  std::string process_in, process_out, process_op;
  std::vector<std::string> process_params;
  FormatFlags process_format;
  process->add_option("input", process_in, "Input file")->required();
  process->add_option("output", process_out, "Output file")->required();
  process->add_option("--op", process_op,
                      "Operation (Binarize, UserKCore, ItemKCore, "
                      "UserItemIterativeKCore, ColdUsers, FilterByRating, "
                      "FilterByTime)")
      ->required();
  process->add_option("--param", process_params,
                      "Operation parameter as key=value (repeatable)");
  add_format_flags(process, process_format);

  // --- split -------------------------------------------------------------
  auto* split = app.add_subcommand("split", "Partition into train/test(/val)");
  std::string split_in, split_strategy, split_out_dir;
  std::vector<std::string> split_params;
  std::int64_t split_seed = 42;
  FormatFlags split_format;
  split->add_option("input", split_in, "Input file")->required();
  split->add_option("--strategy", split_strategy,
                    "RandomHoldOut, TemporalHoldOut, TemporalFixedTimestamp, "
                    "TemporalBestRatio, LeaveNOut, LeaveNIn, "
                    "KRepeatedHoldOut, CrossValidation, PrecomputedSplit")
      ->required();
  split->add_option("--param", split_params,
                    "Strategy parameter as key=value (repeatable)");
  split->add_option("--seed", split_seed, "Seed for randomized strategies");
  split->add_option("--out-dir", split_out_dir, "Output directory")
      ->required();
  add_format_flags(split, split_format);

  // --- export ------------------------------------------------------------
  auto* exp = app.add_subcommand("export",
                                 "Write a split in a framework's layout");
  std::string exp_train, exp_test, exp_val, exp_framework, exp_out_dir;
  FormatFlags exp_format;
  exp->add_option("--train", exp_train, "Train split file")->required();
  exp->add_option("--test", exp_test, "Test split file")->required();
  exp->add_option("--val", exp_val, "Validation split file");
  exp->add_option("--framework", exp_framework,
                  "ClayRS, Cornac, DaisyRec, Elliot, LensKit, RecBole, "
                  "ReChorus, Recommenders, RecPack")
      ->required();
  exp->add_option("--out-dir", exp_out_dir, "Output directory")->required();
  add_format_flags(exp, exp_format);

  // --- download ------------------------------------------------------------
  auto* dl = app.add_subcommand("download",
                                "Fetch, verify and parse a built-in dataset");
  std::string dl_name, dl_version, dl_cache, dl_catalog;
  bool dl_offline = false, dl_trust = false, dl_list = false;
  dl->add_option("name", dl_name, "Dataset name (e.g. movielens)");
  dl->add_option("version", dl_version, "Dataset version (e.g. 1m)");
  dl->add_option("--cache-dir", dl_cache, "Cache directory");
  dl->add_option("--catalog", dl_catalog, "Catalog file");
  dl->add_flag("--offline", dl_offline, "Use only the verified cache");
  dl->add_flag("--trust-unverified", dl_trust,
               "Accept a source without a pinned digest and print the digest "
               "to record");
  dl->add_flag("--list", dl_list, "List the catalog instead of downloading");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*run) {
    IoContext ctx;
    ctx.base_dir = run_base_dir;
    if (!run_cache_dir.empty()) ctx.cache_dir = run_cache_dir;
    if (!run_catalog.empty()) ctx.catalog_path = run_catalog;
    ctx.offline = run_offline;
    if (!override_path.empty()) {
      std::ifstream in(run_config);
      if (!in) fail(errc::io_failure, "cannot open '" + run_config + "'");
      std::string text((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
      const PipelineConfig config = parse_config(text);
      ctx.source_overrides[config.steps.front().operation] =
          SourceOverride{override_path, override_format.to_spec()};
    }
    return run_pipeline(run_config, run_verify, run_emit, ctx);
  }

  if (*stats) {
    const Dataset d = read_dataset(stats_input, stats_format.to_spec());
    const MetricsReport report = metrics_report(d);
    if (stats_json) {
      print_report_json(report);
    } else {
      print_report_text(report);
    }
    return kExitOk;
  }

  if (*sum) {
    const Dataset d = read_dataset(sum_input, sum_format.to_spec());
    std::cout << checksum(d) << "\n";
    return kExitOk;
  }

  if (*convert) {
    const Dataset d = read_dataset(convert_in, convert_from.to_spec());
    const WriteResult written =
        write_dataset(d, convert_out, convert_to.to_spec());
    if (written.lossy) {
      std::cerr << "warning: " << convert_out
                << " cannot carry every field; ratings/timestamps dropped\n";
    }
    return kExitOk;
  }

  if (*process) {
    const ParamList params = parse_cli_params(process_params);
    validate_operation(StepCategory::process, process_op, params);
    const Dataset d = read_dataset(process_in, process_format.to_spec());
    const Dataset out = apply_process_operation(d, process_op, params);
    write_dataset(out, process_out, process_format.to_spec());
    std::cout << out.size() << " interactions, checksum "
              << checksum(out) << "\n";
    return kExitOk;
  }

  if (*split) {
    ParamList params = parse_cli_params(split_params);
    if (split->count("--seed") && !find_param(params, "seed")) {
      set_param(params, "seed", split_seed);
    }
    validate_operation(StepCategory::split, split_strategy, params);
    IoContext ctx;
    const Dataset d = read_dataset(split_in, split_format.to_spec());
    const SplitOutcome outcome =
        apply_split_operation(d, split_strategy, params, ctx);
    const FormatSpec spec = split_format.to_spec();
    const std::string ext =
        spec.kind == FormatKind::json ? "jsonl" : "tsv";
    const std::filesystem::path out_dir(split_out_dir);

    std::string manifest = "files:\n";
    auto emit_part = [&](const Dataset& part, const std::string& role,
                         const std::filesystem::path& dir) {
      const auto path = dir / (role + "." + ext);
      const WriteResult written = write_dataset(part, path, spec);
      manifest += "- role: " + role + "\n";
      manifest += "  path: " +
                  std::filesystem::relative(path, out_dir).string() + "\n";
      manifest += "  md5: " + written.file_md5 + "\n";
    };
    auto emit_split = [&](const SplitResult& s,
                          const std::filesystem::path& dir,
                          const std::string& prefix) {
      emit_part(s.train, "train", dir);
      emit_part(s.test, "test", dir);
      if (s.val) emit_part(*s.val, "val", dir);
      for (const auto& [role, digest] : s.checksums) {
        std::cout << prefix << role << ": " << digest << "\n";
      }
    };
    if (outcome.split) {
      emit_split(*outcome.split, out_dir, "");
    } else {
      for (std::size_t i = 0; i < outcome.folds->folds.size(); ++i) {
        const std::string fold = "fold_" + std::to_string(i);
        emit_split(outcome.folds->folds[i], out_dir / fold, fold + ".");
      }
    }
    const auto manifest_path = out_dir / "manifest.yml";
    std::ofstream out(manifest_path, std::ios::trunc);
    if (!out) {
      fail(errc::io_failure, "cannot write '" + manifest_path.string() + "'");
    }
    out << manifest;
    return kExitOk;
  }

  if (*exp) {
    const ExportProfile* profile = find_export_profile(exp_framework);
    if (!profile) {
      fail(errc::usage_error, "unknown framework '" + exp_framework + "'");
    }
    const FormatSpec spec = exp_format.to_spec();
    const Dataset train = read_dataset(exp_train, spec);
    const Dataset test = read_dataset(exp_test, spec);
    std::optional<Dataset> val;
    if (!exp_val.empty()) val = read_dataset(exp_val, spec);
    const ExportOutcome outcome =
        export_split(train, test, val, *profile, exp_out_dir);
    for (const auto& entry : outcome.manifest.entries) {
      std::cout << entry.role << ": " << entry.path.string() << " md5 "
                << entry.file_md5 << "\n";
    }
    return kExitOk;
  }

  if (*dl) {
    const Registry local = !dl_catalog.empty()
                               ? Registry::from_file(dl_catalog)
                               : Registry();
    const Registry& registry =
        !dl_catalog.empty() ? local : Registry::builtin();
    if (dl_list) {
      for (const auto& desc : registry.list()) {
        std::cout << desc.name << " " << desc.version << " "
                  << (desc.archive_checksum.empty() ? "(unpinned)"
                                                    : desc.archive_checksum)
                  << " " << desc.source_url << "\n";
      }
      return kExitOk;
    }
    if (dl_name.empty() || dl_version.empty()) {
      fail(errc::usage_error, "download needs a dataset name and version");
    }
    const DatasetDescriptor& desc = registry.resolve(dl_name, dl_version);
    FetchOptions options;
    if (!dl_cache.empty()) options.cache_dir = dl_cache;
    options.offline = dl_offline;
    options.trust_unpinned = dl_trust;
    const Dataset d = fetch_and_load(desc, options);
    std::cout << desc.name << "/" << desc.version << ": " << d.size()
              << " interactions, checksum " << checksum(d) << "\n";
    return kExitOk;
  }

  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return main_impl(argc, argv);
  } catch (const Error& e) {
    std::cerr << "recdata: error: " << e.what() << "\n";
    return e.code() == errc::usage_error ? kExitUsage : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "recdata: error: " << e.what() << "\n";
    return kExitError;
  }
}

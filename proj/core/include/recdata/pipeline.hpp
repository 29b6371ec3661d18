#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recdata/dataset.hpp"
#include "recdata/export.hpp"
#include "recdata/format.hpp"
#include "recdata/splitting.hpp"

namespace recdata {

// One step of a declarative pipeline document. `checksum` carries the
// document's expected digest(s) on parse and the computed ones after
// execution.
struct PipelineStep {
  StepCategory category = StepCategory::process;
  std::string operation;
  ParamList params;
  StepChecksum checksum;

  bool operator==(const PipelineStep&) const = default;
};

struct PipelineConfig {
  std::vector<PipelineStep> steps;

  bool operator==(const PipelineConfig&) const = default;
};

// Parses the YAML pipeline document:
//
//   pipeline:
//   - name: load            # load | process | split | export
//     operation: MovieLens
//     params:
//       version: 1m
//     checksum: <32 hex>    # optional; a map for split steps
//
// Structure rules: the first step is the only load step, at most one split
// step exists, process steps precede it, framework exports follow it, and
// file-write exports only appear in split-less pipelines. Unknown top-level
// keys, step keys, operations and parameters are rejected (schema_error /
// unknown_operation / bad_params, all naming the step).
PipelineConfig parse_config(std::string_view yaml_text);

// Deterministic emission: steps in order, fields in Listing order
// (name, operation, params, checksum), params in stored order, digests in
// (test, val, train) order. parse_config(write_config(c)) == c.
std::string write_config(const PipelineConfig& config);

enum class RunMode { record, verify };

struct SourceOverride {
  std::filesystem::path path;
  FormatSpec format;
};

// Everything execution needs from the environment.
struct IoContext {
  std::filesystem::path base_dir = ".";  // resolves relative paths
  std::filesystem::path cache_dir;       // registry cache; empty = default
  std::optional<std::filesystem::path> catalog_path;
  bool offline = false;
  // Replaces the data source of a load step by operation name; lets tests
  // and scripts run any recorded pipeline against a local fixture.
  std::map<std::string, SourceOverride> source_overrides;
};

struct StepOutcome {
  PipelineStep step;       // executed; checksum holds the computed digest(s)
  StepChecksum expected;   // from the document (may be empty)
  bool had_expected = false;
  bool matched = true;     // false only for a verify-mode divergence
};

struct PipelineResult {
  std::vector<StepOutcome> steps;
  // Final state: exactly one of these is set (dataset until a split runs).
  std::optional<Dataset> dataset;
  std::optional<SplitResult> split;
  std::optional<FoldSet> folds;
  std::vector<ExportManifest> manifests;

  bool all_match() const;
  std::vector<std::size_t> mismatches() const;  // 0-based step indices
};

// Runs the steps in order, recording each state digest. record mode emits
// them; verify mode also compares against the document's digests and keeps
// going after a divergence so the report covers every step. A mismatch is
// never an exception, only a report entry. Other step failures propagate
// with the step index prepended.
PipelineResult execute(const PipelineConfig& config, RunMode mode,
                       const IoContext& context);

// The executed history as a document parse_config accepts; replaying it in
// verify mode over the same inputs reports all-match.
std::string export_history(const PipelineResult& result);

// --- single-operation access (shared with the CLI) --------------------------

// Throws unknown_operation / bad_params exactly as parse_config would for a
// step of this category.
void validate_operation(StepCategory category, const std::string& operation,
                        const ParamList& params);

Dataset apply_process_operation(const Dataset& d, const std::string& operation,
                                const ParamList& params);

struct SplitOutcome {
  std::optional<SplitResult> split;
  std::optional<FoldSet> folds;
};

SplitOutcome apply_split_operation(const Dataset& d,
                                   const std::string& operation,
                                   const ParamList& params,
                                   const IoContext& context);

// Scalar sniffing used for YAML params and CLI key=value pairs: true/false,
// integer, decimal, otherwise text.
ParamValue param_from_text(std::string_view text);

}  // namespace recdata

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "recdata/dataset.hpp"

namespace recdata {

// On-disk layout one recommendation framework expects for a split. The
// profiles shipped with the library are best-effort defaults: none of the
// target frameworks publishes a byte-level contract and their readers drift
// across versions, so every field here is plain data that callers may
// override instead of baked-in logic.
struct ExportProfile {
  std::string framework;
  std::string extension = "tsv";
  std::string separator = "\t";
  bool header = false;
  // Column names when header is set; aligned with (user, item, rating,
  // timestamp) after dropping the columns the profile or dataset omits.
  std::vector<std::string> header_names;
  bool rating_required = true;    // missing ratings are a SchemaMismatch
  bool include_timestamp = true;  // written when the dataset carries one
  bool timestamp_required = false;
  std::string train_name = "train";
  std::string test_name = "test";
  std::string val_name = "val";
};

// Profiles for ClayRS, Cornac, DaisyRec, Elliot, LensKit, RecBole, ReChorus,
// Recommenders and RecPack.
const std::vector<ExportProfile>& builtin_export_profiles();

// Case-insensitive lookup; nullptr when unknown.
const ExportProfile* find_export_profile(std::string_view framework);

struct ExportManifest {
  struct Entry {
    std::string role;  // train | test | val
    std::filesystem::path path;
    std::string file_md5;
  };
  std::vector<Entry> entries;
  std::filesystem::path manifest_path;  // the written manifest.yml
};

struct ExportOutcome {
  ExportManifest manifest;
  // Inputs with the export step appended to their histories.
  Dataset train;
  Dataset test;
  std::optional<Dataset> val;
};

// Writes train/test(/val) files into out_dir per the profile, plus a
// manifest.yml listing every file with its MD5. Throws schema_mismatch when
// the profile needs a field the datasets lack.
ExportOutcome export_split(const Dataset& train, const Dataset& test,
                           const std::optional<Dataset>& val,
                           const ExportProfile& profile,
                           const std::filesystem::path& out_dir);

}  // namespace recdata

#include "recdata/export.hpp"

#include <fstream>

#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "recdata/io.hpp"
#include "text_util.hpp"

namespace recdata {

namespace {

ExportProfile make_profile(std::string framework, std::string extension,
                           std::string separator, bool header,
                           std::vector<std::string> header_names) {
  ExportProfile p;
  p.framework = std::move(framework);
  p.extension = std::move(extension);
  p.separator = std::move(separator);
  p.header = header;
  p.header_names = std::move(header_names);
  return p;
}

std::vector<ExportProfile> make_builtin_profiles() {
  std::vector<ExportProfile> profiles;

  profiles.push_back(make_profile("ClayRS", "csv", ",", true,
                                  {"user_id", "item_id", "score", "timestamp"}));
  profiles.push_back(
      make_profile("Cornac", "csv", ",", true,
                   {"user", "item", "rating", "timestamp"}));
  profiles.push_back(make_profile("DaisyRec", "tsv", "\t", false, {}));

  // Per-split TSV without header, user/item/rating only.
  auto elliot = make_profile("Elliot", "tsv", "\t", false, {});
  elliot.include_timestamp = false;
  profiles.push_back(std::move(elliot));

  profiles.push_back(make_profile("LensKit", "csv", ",", true,
                                  {"user", "item", "rating", "timestamp"}));

  auto recbole = make_profile(
      "RecBole", "inter", "\t", true,
      {"user_id:token", "item_id:token", "rating:float", "timestamp:float"});
  profiles.push_back(std::move(recbole));

  // Sequential framework: needs timestamps, tolerates missing ratings, and
  // names the validation split "dev".
  auto rechorus = make_profile("ReChorus", "tsv", "\t", true,
                               {"user_id", "item_id", "rating", "time"});
  rechorus.rating_required = false;
  rechorus.timestamp_required = true;
  rechorus.val_name = "dev";
  profiles.push_back(std::move(rechorus));

  profiles.push_back(make_profile("Recommenders", "csv", ",", true,
                                  {"userID", "itemID", "rating", "timestamp"}));

  auto recpack = make_profile("RecPack", "csv", ",", true,
                              {"user_id", "item_id", "rating", "timestamp"});
  recpack.rating_required = false;
  profiles.push_back(std::move(recpack));

  return profiles;
}

std::string render_split_file(const Dataset& d, const ExportProfile& profile,
                              bool with_rating, bool with_timestamp) {
  std::string out;
  if (profile.header && !profile.header_names.empty()) {
    std::size_t emitted = 0;
    auto emit = [&](std::size_t index) {
      if (emitted) out += profile.separator;
      out += index < profile.header_names.size() ? profile.header_names[index]
                                                 : "";
      ++emitted;
    };
    emit(0);
    emit(1);
    if (with_rating) emit(2);
    if (with_timestamp) emit(3);
    out += '\n';
  }
  for (const auto& r : d.interactions()) {
    out += r.user;
    out += profile.separator;
    out += r.item;
    if (with_rating) {
      out += profile.separator;
      out += render_rating(*r.rating);
    }
    if (with_timestamp) {
      out += profile.separator;
      out += render_timestamp(*r.timestamp);
    }
    out += '\n';
  }
  return out;
}

}  // namespace

const std::vector<ExportProfile>& builtin_export_profiles() {
  static const std::vector<ExportProfile> profiles = make_builtin_profiles();
  return profiles;
}

const ExportProfile* find_export_profile(std::string_view framework) {
  const std::string key = detail::normalize_name(framework);
  for (const auto& profile : builtin_export_profiles()) {
    if (detail::normalize_name(profile.framework) == key) return &profile;
  }
  return nullptr;
}

ExportOutcome export_split(const Dataset& train, const Dataset& test,
                           const std::optional<Dataset>& val,
                           const ExportProfile& profile,
                           const std::filesystem::path& out_dir) {
  // Validate the whole request before touching the filesystem. Empty splits
  // carry no schema of their own and are compatible with anything.
  const Dataset* reference = !train.empty() ? &train
                             : !test.empty() ? &test
                             : (val && !val->empty()) ? &*val
                                                      : nullptr;
  const bool has_ratings = reference && reference->has_ratings();
  const bool has_timestamps = reference && reference->has_timestamps();

  auto check = [&](const Dataset& d, const char* role) {
    if (d.empty()) return;
    if (profile.rating_required && !d.has_ratings()) {
      fail(errc::schema_mismatch,
           std::string(profile.framework) + " export needs ratings but the " +
               role + " split has none");
    }
    if (profile.timestamp_required && !d.has_timestamps()) {
      fail(errc::schema_mismatch,
           std::string(profile.framework) + " export needs timestamps but "
                                            "the " +
               role + " split has none");
    }
    if (d.has_ratings() != has_ratings ||
        d.has_timestamps() != has_timestamps) {
      fail(errc::schema_mismatch,
           "train/test/val splits disagree on rating or timestamp presence");
    }
  };
  check(train, "train");
  check(test, "test");
  if (val) check(*val, "val");

  const bool with_rating = has_ratings;
  const bool with_timestamp = profile.include_timestamp && has_timestamps;
  const bool lossy = (has_ratings && !with_rating) ||
                     (has_timestamps && !with_timestamp);

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  ExportOutcome outcome{ExportManifest{}, train, test, val};

  auto write_one = [&](const Dataset& d, const std::string& role,
                       const std::string& stem) -> Dataset {
    const auto path = out_dir / (stem + "." + profile.extension);
    const std::string bytes =
        render_split_file(d, profile, with_rating, with_timestamp);
    {
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      if (!out) {
        fail(errc::io_failure, "cannot write '" + path.string() + "'");
      }
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      if (!out) fail(errc::io_failure, "write failed on '" + path.string() + "'");
    }
    outcome.manifest.entries.push_back(
        ExportManifest::Entry{role, path, md5_hex(bytes)});

    ParamList params;
    set_param(params, "output_path", out_dir.string());
    set_param(params, "role", role);
    if (lossy) set_param(params, "lossy", true);
    return d.with_step(ProvenanceStep{StepCategory::export_, profile.framework,
                                      std::move(params),
                                      StepChecksum(checksum(d))});
  };

  outcome.train = write_one(train, "train", profile.train_name);
  outcome.test = write_one(test, "test", profile.test_name);
  if (val) outcome.val = write_one(*val, "val", profile.val_name);

  std::string manifest = "files:\n";
  for (const auto& entry : outcome.manifest.entries) {
    manifest += "- role: " + entry.role + "\n";
    manifest += "  path: " + entry.path.filename().string() + "\n";
    manifest += "  md5: " + entry.file_md5 + "\n";
  }
  const auto manifest_path = out_dir / "manifest.yml";
  {
    std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
    if (!out) {
      fail(errc::io_failure, "cannot write '" + manifest_path.string() + "'");
    }
    out << manifest;
  }
  outcome.manifest.manifest_path = manifest_path;
  return outcome;
}

}  // namespace recdata

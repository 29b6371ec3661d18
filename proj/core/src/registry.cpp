#include "recdata/registry.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <yaml-cpp/yaml.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "archive.hpp"
#include "recdata/checksum.hpp"
#include "recdata/errors.hpp"
#include "recdata/io.hpp"
#include "text_util.hpp"

namespace recdata {

namespace {

namespace fs = std::filesystem;

FormatSpec format_from_yaml(const YAML::Node& node, const std::string& where) {
  if (!node || !node.IsMap()) {
    fail(errc::schema_error, where + ": missing format block");
  }
  FormatSpec spec;
  const auto kind = parse_format_kind(node["kind"] ? node["kind"].as<std::string>() : "tabular");
  if (!kind) {
    fail(errc::schema_error,
         where + ": unknown format kind '" + node["kind"].as<std::string>() + "'");
  }
  spec.kind = *kind;
  if (node["sep"]) spec.separator = node["sep"].as<std::string>();
  if (node["header"]) spec.has_header = node["header"].as<bool>();
  if (node["user_col"]) spec.columns.user = node["user_col"].as<std::size_t>();
  if (node["item_col"]) spec.columns.item = node["item_col"].as<std::size_t>();
  if (node["rating_col"]) {
    spec.columns.rating = node["rating_col"].as<std::size_t>();
    spec.columns.infer_extra = false;
  }
  if (node["timestamp_col"]) {
    spec.columns.timestamp = node["timestamp_col"].as<std::size_t>();
    spec.columns.infer_extra = false;
  }
  if (node["layout"]) {
    const auto layout = node["layout"].as<std::string>();
    if (layout == "array") {
      spec.json_layout = JsonLayout::array;
    } else if (layout != "lines") {
      fail(errc::schema_error, where + ": unknown json layout '" + layout + "'");
    }
  }
  spec.validate();
  return spec;
}

std::string optional_text(const YAML::Node& node) {
  if (!node || node.IsNull()) return {};
  return node.as<std::string>();
}

// --- download ---------------------------------------------------------------

void download_to(const std::string& url, const fs::path& destination) {
  if (url.rfind("file://", 0) == 0) {
    const fs::path source = url.substr(7);
    std::error_code ec;
    fs::copy_file(source, destination, fs::copy_options::overwrite_existing,
                  ec);
    if (ec) {
      fail(errc::download_failure,
           "cannot copy '" + source.string() + "': " + ec.message());
    }
    return;
  }
  const bool http = url.rfind("http://", 0) == 0;
  const bool https = url.rfind("https://", 0) == 0;
  if (!http && !https) {
    // Treat anything without a scheme as a local path.
    std::error_code ec;
    fs::copy_file(fs::path(url), destination,
                  fs::copy_options::overwrite_existing, ec);
    if (ec) {
      fail(errc::download_failure,
           "cannot copy '" + url + "': " + ec.message());
    }
    return;
  }

  const auto scheme_end = url.find("://") + 3;
  const auto path_start = url.find('/', scheme_end);
  const std::string origin = url.substr(0, path_start);
  const std::string path =
      path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(origin);
  client.set_follow_location(true);
  client.set_connection_timeout(30);
  client.set_read_timeout(300);

  std::ofstream out(destination, std::ios::binary | std::ios::trunc);
  if (!out) {
    fail(errc::io_failure, "cannot open '" + destination.string() + "'");
  }
  auto result = client.Get(path, [&](const char* data, size_t size) {
    out.write(data, static_cast<std::streamsize>(size));
    return static_cast<bool>(out);
  });
  out.close();
  if (!result || result->status != 200) {
    std::error_code ec;
    fs::remove(destination, ec);
    fail(errc::download_failure,
         "download of '" + url + "' failed" +
             (result ? " (HTTP " + std::to_string(result->status) + ")"
                     : " (" + httplib::to_string(result.error()) + ")"));
  }
}

std::string archive_filename(const DatasetDescriptor& desc) {
  const auto slash = desc.source_url.find_last_of('/');
  std::string name = slash == std::string::npos
                         ? desc.source_url
                         : desc.source_url.substr(slash + 1);
  if (const auto query = name.find('?'); query != std::string::npos) {
    name = name.substr(0, query);
  }
  if (name.empty()) name = "archive.bin";
  return name;
}

// Exclusive-create lock file; concurrent fetchers of the same dataset wait
// on the verified marker instead of downloading twice.
class FetchLock {
 public:
  explicit FetchLock(fs::path path) : path_(std::move(path)) {}
  ~FetchLock() { release(); }

  bool try_acquire() {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      ::close(fd);
      held_ = true;
    }
    return held_;
  }

  void release() {
    if (held_) {
      std::error_code ec;
      fs::remove(path_, ec);
      held_ = false;
    }
  }

 private:
  fs::path path_;
  bool held_ = false;
};

}  // namespace

Registry Registry::from_string(std::string_view yaml,
                               const std::string& source_name) {
  YAML::Node doc;
  try {
    doc = YAML::Load(std::string(yaml));
  } catch (const YAML::Exception& e) {
    fail(errc::schema_error, source_name + ": " + e.what());
  }
  const YAML::Node datasets = doc["datasets"];
  if (!datasets || !datasets.IsSequence()) {
    fail(errc::schema_error, source_name + ": expected a 'datasets' list");
  }

  Registry registry;
  std::unordered_set<std::string> seen;
  std::size_t index = 0;
  for (const auto& entry : datasets) {
    ++index;
    const std::string where = source_name + ": dataset " + std::to_string(index);
    DatasetDescriptor desc;
    if (!entry["name"] || !entry["version"]) {
      fail(errc::schema_error, where + ": needs name and version");
    }
    desc.name = entry["name"].as<std::string>();
    desc.version = entry["version"].as<std::string>();
    desc.source_url = optional_text(entry["url"]);
    desc.archive_checksum = detail::to_lower(optional_text(entry["md5"]));
    if (!desc.archive_checksum.empty() &&
        !is_hex_digest(desc.archive_checksum)) {
      fail(errc::schema_error,
           where + ": md5 must be 32 lowercase hex characters");
    }
    desc.extract_path = optional_text(entry["extract_path"]);
    desc.format = format_from_yaml(entry["format"], where);
    desc.citation = optional_text(entry["citation"]);

    const std::string key =
        detail::normalize_name(desc.name) + "\x1f" + detail::to_lower(desc.version);
    if (!seen.insert(key).second) {
      fail(errc::schema_error, where + ": duplicate (name, version) pair '" +
                                   desc.name + "', '" + desc.version + "'");
    }
    registry.descriptors_.push_back(std::move(desc));
  }
  return registry;
}

Registry Registry::from_file(const std::filesystem::path& catalog) {
  return from_string(detail::slurp_file(catalog), catalog.string());
}

const Registry& Registry::builtin() {
  static const Registry registry =
      from_string(detail::builtin_catalog_yaml(), "<builtin catalog>");
  return registry;
}

std::vector<const DatasetDescriptor*> Registry::versions_of(
    std::string_view name) const {
  const std::string key = detail::normalize_name(name);
  std::vector<const DatasetDescriptor*> out;
  for (const auto& desc : descriptors_) {
    if (detail::normalize_name(desc.name) == key) out.push_back(&desc);
  }
  return out;
}

const DatasetDescriptor& Registry::resolve(std::string_view name,
                                           std::string_view version) const {
  const auto candidates = versions_of(name);
  if (candidates.empty()) {
    fail(errc::unknown_dataset,
         "unknown dataset '" + std::string(name) + "'");
  }
  const std::string want = detail::to_lower(version);
  for (const auto* desc : candidates) {
    if (detail::to_lower(desc->version) == want) return *desc;
  }
  std::string available;
  for (const auto* desc : candidates) {
    if (!available.empty()) available += ", ";
    available += desc->version;
  }
  fail(errc::unknown_version, "dataset '" + std::string(name) +
                                  "' has no version '" + std::string(version) +
                                  "' (available: " + available + ")");
}

std::filesystem::path default_cache_dir() {
  if (const char* env = std::getenv("RECDATA_CACHE")) return env;
  if (const char* xdg = std::getenv("XDG_CACHE_HOME")) {
    return fs::path(xdg) / "recdata";
  }
  if (const char* home = std::getenv("HOME")) {
    return fs::path(home) / ".cache" / "recdata";
  }
  return fs::path(".") / "recdata-cache";
}

Dataset fetch_and_load(const DatasetDescriptor& desc,
                       const FetchOptions& options) {
  const fs::path cache_root =
      options.cache_dir.empty() ? default_cache_dir() : options.cache_dir;
  const fs::path dir = cache_root / desc.name / desc.version;
  const fs::path archive = dir / archive_filename(desc);
  const fs::path marker = dir / "verified";

  auto verified = [&] { return fs::exists(marker) && fs::exists(archive); };

  if (!verified()) {
    if (options.offline) {
      fail(errc::offline_miss, "offline and no verified cache copy of " +
                                   desc.name + "/" + desc.version + " under '" +
                                   dir.string() + "'");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);

    FetchLock lock(dir / ".fetch-lock");
    const auto deadline =
        std::chrono::steady_clock::now() + std::chrono::minutes(10);
    while (!lock.try_acquire()) {
      if (verified()) break;
      if (std::chrono::steady_clock::now() > deadline) {
        fail(errc::download_failure,
             "timed out waiting for a concurrent fetch of " + desc.name + "/" +
                 desc.version);
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }

    if (!verified()) {
      // We hold the lock and there is no verified copy: fetch it.
      if (options.on_download) options.on_download(desc.source_url);
      const fs::path tmp = dir / (archive.filename().string() + ".part");
      try {
        download_to(desc.source_url, tmp);
      } catch (...) {
        lock.release();
        throw;
      }
      const std::string digest = md5_file_hex(tmp);
      if (desc.archive_checksum.empty() && !options.trust_unpinned) {
        std::error_code rm;
        fs::remove(tmp, rm);
        lock.release();
        fail(errc::unpinned_checksum,
             desc.name + "/" + desc.version +
                 " has no pinned digest in the catalog; downloaded copy "
                 "hashed to " +
                 digest +
                 " — record it in the catalog or pass trust_unpinned");
      }
      if (!desc.archive_checksum.empty() && digest != desc.archive_checksum) {
        std::error_code rm;
        fs::remove(tmp, rm);
        lock.release();
        fail(errc::checksum_mismatch,
             desc.name + "/" + desc.version + ": archive digest " + digest +
                 " does not match the catalog value " + desc.archive_checksum +
                 "; refusing to parse");
      }
      fs::rename(tmp, archive, ec);
      if (ec) {
        lock.release();
        fail(errc::io_failure, "cannot move verified archive into place");
      }
      std::ofstream mark(marker, std::ios::trunc);
      mark << digest << "\n";
    }
  }

  // Verified archive in place; extract if needed and parse.
  fs::path data_path = archive;
  if (!desc.extract_path.empty()) {
    const fs::path extracted = dir / "extracted" / desc.extract_path;
    if (!fs::exists(extracted)) {
      const std::string bytes = detail::slurp_file(archive);
      if (!detail::looks_zip(bytes)) {
        fail(errc::io_failure,
             desc.name + "/" + desc.version +
                 ": extract_path is set but the archive is not a ZIP");
      }
      const std::string entry = detail::zip_extract_entry(bytes, desc.extract_path);
      std::error_code ec;
      fs::create_directories(extracted.parent_path(), ec);
      std::ofstream out(extracted, std::ios::binary | std::ios::trunc);
      if (!out) {
        fail(errc::io_failure, "cannot write '" + extracted.string() + "'");
      }
      out.write(entry.data(), static_cast<std::streamsize>(entry.size()));
    }
    data_path = extracted;
  }

  Dataset parsed = read_dataset(data_path, desc.format);

  ParamList params;
  set_param(params, "name", desc.name);
  set_param(params, "version", desc.version);
  if (!desc.source_url.empty()) set_param(params, "url", desc.source_url);
  {
    std::ifstream mark(marker);
    std::string digest;
    mark >> digest;
    if (is_hex_digest(digest)) set_param(params, "archive_md5", digest);
  }
  std::vector<Interaction> rows = parsed.interactions();
  return build_dataset(std::move(rows),
                       ProvenanceStep{StepCategory::load, desc.name,
                                      std::move(params),
                                      {}});
}

}  // namespace recdata

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "recdata/dataset.hpp"
#include "recdata/format.hpp"

namespace recdata {

// Catalog entry for one version of one public dataset.
struct DatasetDescriptor {
  std::string name;
  std::string version;
  FormatSpec format;
  std::string source_url;
  // 32 lowercase hex characters, or empty when no digest has been recorded
  // yet (download is then refused unless explicitly trusted).
  std::string archive_checksum;
  // File to extract from a ZIP archive; empty when the download itself is
  // the data file. Gzip sources need no extract path.
  std::string extract_path;
  std::string citation;
};

// The dataset catalog. The built-in one is compiled in from
// core/data/catalog.yml; any YAML file with the same shape can replace it.
class Registry {
 public:
  static const Registry& builtin();
  static Registry from_file(const std::filesystem::path& catalog);
  static Registry from_string(std::string_view yaml,
                              const std::string& source_name = "<catalog>");

  const std::vector<DatasetDescriptor>& list() const noexcept {
    return descriptors_;
  }

  // Name lookup ignores case and punctuation ("MovieLens" == "movielens",
  // "Last.fm" == "lastfm"). Throws unknown_dataset / unknown_version (the
  // latter names the versions that do exist).
  const DatasetDescriptor& resolve(std::string_view name,
                                   std::string_view version) const;

  // All versions of a dataset, in catalog order; empty when unknown.
  std::vector<const DatasetDescriptor*> versions_of(
      std::string_view name) const;

 private:
  std::vector<DatasetDescriptor> descriptors_;
};

struct FetchOptions {
  std::filesystem::path cache_dir;  // empty -> default_cache_dir()
  bool offline = false;
  // Accept a source without a pinned digest, recording what was seen. The
  // default refuses: nothing is ever parsed unverified.
  bool trust_unpinned = false;
  // Called once per actual network/file transfer (not on cache hits).
  std::function<void(const std::string& url)> on_download;
};

// Downloads (or reuses the verified cache copy of) the descriptor's archive,
// verifies its MD5 before anything is parsed, extracts the configured entry
// and parses it into a Dataset whose load step records name, version and
// archive digest.
//
// Cache layout: <cache_dir>/<name>/<version>/<archive> plus a `verified`
// marker written only after the digest matched. Concurrent fetches of the
// same dataset are single-flight: one downloader, the rest wait on the
// marker.
//
// Throws checksum_mismatch (archive removed, nothing parsed),
// download_failure, offline_miss, unpinned_checksum.
Dataset fetch_and_load(const DatasetDescriptor& desc,
                       const FetchOptions& options);

// $RECDATA_CACHE, else $XDG_CACHE_HOME/recdata, else ~/.cache/recdata.
std::filesystem::path default_cache_dir();

namespace detail {
const char* builtin_catalog_yaml();
}

}  // namespace recdata
